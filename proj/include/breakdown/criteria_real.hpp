#pragma once

#include "breakdown/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace breakdown::real {

struct PhaseAverages {
    Vec2 E1 = Vec2::Zero(); // <E>_1, average over phase 1
    Vec2 E2 = Vec2::Zero();
};

/// Phase averages from the mean field and current of a two-phase body.
inline PhaseAverages phase_averages(const MomentSet& m, const PhasePair& p) {
    if (p.sigma1 == p.sigma2)
        throw Error(ErrorCode::EqualConductivities, "phase averages need sigma1 != sigma2");
    if (!(p.f1 > 0.0) || !(p.f2 > 0.0))
        throw Error(ErrorCode::InvalidInput, "volume fractions must be positive");
    return {(m.J - p.sigma2 * m.E) / (p.f1 * (p.sigma1 - p.sigma2)),
            (m.J - p.sigma1 * m.E) / (p.f2 * (p.sigma2 - p.sigma1))};
}

/// Volume moments <chi_alpha E> = f_alpha <E>_alpha.
inline std::pair<Vec2, Vec2> phase_moments(const MomentSet& m, const PhasePair& p) {
    const auto a = phase_averages(m, p);
    return {p.f1 * a.E1, p.f2 * a.E2};
}

struct BoundaryFieldReport {
    CriterionVerdict verdict;
    std::vector<double> field_magnitude; // |E| per sample
    std::vector<double> margin;          // c_alpha - |E| per sample
    std::size_t worst_index = 0;
};

/// Pointwise check of |E| on the boundary. Samples carry the phase adjacent to
/// the boundary; the normal component is (J.n)/sigma_alpha.
inline BoundaryFieldReport boundary_field_criterion(const BoundaryDataset& d, const PhasePair& p) {
    const auto dvds = boundary::tangential_derivative(d);
    BoundaryFieldReport r;
    r.field_magnitude.resize(d.samples.size());
    r.margin.resize(d.samples.size());
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const auto& s = d.samples[i];
        double sigma = 0.0, c = 0.0;
        if (s.phase == 1) {
            sigma = p.sigma1;
            c = p.c1;
        } else if (s.phase == 2) {
            sigma = p.sigma2;
            c = p.c2;
        } else {
            throw Error(ErrorCode::UnknownBoundaryPhase, "sample " + std::to_string(i) + " has no phase label");
        }
        const double en = s.JdotN / sigma;
        r.field_magnitude[i] = std::hypot(en, dvds[i]);
        r.margin[i] = c - r.field_magnitude[i];
        if (r.margin[i] < worst) {
            worst = r.margin[i];
            r.worst_index = i;
        }
    }
    r.verdict = CriterionVerdict::from_margin(worst, "boundary |E| exceeds threshold");
    return r;
}

struct PhaseAverageReport {
    CriterionVerdict verdict;
    PhaseAverages averages;
    double margin1 = 0.0; // c1 - |<E>_1|
    double margin2 = 0.0;
};

inline PhaseAverageReport phase_average_criterion(const MomentSet& m, const PhasePair& p) {
    PhaseAverageReport r;
    r.averages = phase_averages(m, p);
    r.margin1 = p.c1 - r.averages.E1.norm();
    r.margin2 = p.c2 - r.averages.E2.norm();
    r.verdict = CriterionVerdict::from_margin(std::min(r.margin1, r.margin2),
                                              r.margin1 <= r.margin2 ? "phase 1 average" : "phase 2 average");
    return r;
}

/// <J.E> <= sigma1 c1^2 f1 + sigma2 c2^2 f2
inline CriterionVerdict power_criterion(const MomentSet& m, const PhasePair& p) {
    const double budget = p.sigma1 * p.c1 * p.c1 * p.f1 + p.sigma2 * p.c2 * p.c2 * p.f2;
    return CriterionVerdict::from_margin(budget - m.power, "dissipation budget");
}

struct PerturbationReport {
    CriterionVerdict verdict;
    double energy1 = 0.0; // int over phase 1 of |E|^2
    double energy2 = 0.0;
    double margin1 = 0.0;
    double margin2 = 0.0;
};

/// Per-phase energies from a base measurement and one with sigma_alpha
/// replaced by sigma_alpha + delta_alpha (first order in delta). Powers are
/// domain averages; area converts them to integrals.
inline PerturbationReport perturbation_criterion(double base_power, double perturbed_power, double delta1,
                                                 double delta2, double area, const PhasePair& p) {
    const double det = delta1 * p.sigma2 - delta2 * p.sigma1;
    const double scale = std::abs(delta1 * p.sigma2) + std::abs(delta2 * p.sigma1);
    if (!(std::abs(det) > 1e-12 * scale) || scale == 0.0)
        throw Error(ErrorCode::SingularPerturbation, "perturbation is proportional to the conductivities");
    const double r1 = (perturbed_power - base_power) * area;
    const double r2 = base_power * area;
    PerturbationReport r;
    r.energy1 = (r1 * p.sigma2 - delta2 * r2) / det;
    r.energy2 = (delta1 * r2 - p.sigma1 * r1) / det;
    r.margin1 = area * p.f1 * p.c1 * p.c1 - r.energy1;
    r.margin2 = area * p.f2 * p.c2 * p.c2 - r.energy2;
    r.verdict = CriterionVerdict::from_margin(std::min(r.margin1, r.margin2),
                                              r.margin1 <= r.margin2 ? "phase 1 energy" : "phase 2 energy");
    return r;
}

enum class BreakdownOrder { Phase1First, Phase2First, Indeterminate };

inline const char* to_string(BreakdownOrder o) {
    switch (o) {
    case BreakdownOrder::Phase1First: return "Phase1First";
    case BreakdownOrder::Phase2First: return "Phase2First";
    case BreakdownOrder::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

/// Which phase reaches its threshold first in a two-phase body under any
/// loading. Ties are Indeterminate.
inline BreakdownOrder breakdown_order(const PhasePair& p) {
    const double r = (p.sigma1 / p.sigma2) * (p.sigma1 / p.sigma2);
    const double c1s = p.c1 * p.c1, c2s = p.c2 * p.c2;
    if (c2s > c1s * std::max(r, 1.0)) return BreakdownOrder::Phase1First;
    if (c2s < c1s * std::min(r, 1.0)) return BreakdownOrder::Phase2First;
    return BreakdownOrder::Indeterminate;
}

} // namespace breakdown::real
