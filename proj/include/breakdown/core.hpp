#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace breakdown {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using cplx = std::complex<double>;

enum class ErrorCode {
    EmptyDataset,
    InsufficientSamples,
    NonpositiveArea,
    FluxNotConserved,
    GeometryMismatch,
    TractionImbalance,
    EqualConductivities,
    UnknownBoundaryPhase,
    SingularPerturbation,
    ZeroSigma2,
    EqualModuli,
    NumericalInconclusive,
    SingularBeta,
    DegeneratePerturbation,
    DimensionMismatch,
    DegenerateViewport,
    PoleEvaluation,
    BranchPointEvaluation,
    InvalidGenerator,
    DegenerateGamma,
    PointInsideInclusion,
    DegenerateDenominator,
    OmegaTooLarge,
    SingularSystem,
    InvalidInput,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NonpositiveArea: return "NonpositiveArea";
    case ErrorCode::FluxNotConserved: return "FluxNotConserved";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::TractionImbalance: return "TractionImbalance";
    case ErrorCode::EqualConductivities: return "EqualConductivities";
    case ErrorCode::UnknownBoundaryPhase: return "UnknownBoundaryPhase";
    case ErrorCode::SingularPerturbation: return "SingularPerturbation";
    case ErrorCode::ZeroSigma2: return "ZeroSigma2";
    case ErrorCode::EqualModuli: return "EqualModuli";
    case ErrorCode::NumericalInconclusive: return "NumericalInconclusive";
    case ErrorCode::SingularBeta: return "SingularBeta";
    case ErrorCode::DegeneratePerturbation: return "DegeneratePerturbation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateViewport: return "DegenerateViewport";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::BranchPointEvaluation: return "BranchPointEvaluation";
    case ErrorCode::InvalidGenerator: return "InvalidGenerator";
    case ErrorCode::DegenerateGamma: return "DegenerateGamma";
    case ErrorCode::PointInsideInclusion: return "PointInsideInclusion";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::OmegaTooLarge: return "OmegaTooLarge";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Outcome of a scalar breakdown test. violated holds exactly when margin < 0.
struct CriterionVerdict {
    bool violated = false;
    double margin = 0.0;
    std::string which;

    static CriterionVerdict from_margin(double margin, std::string which = {}) {
        return {margin < 0.0, margin, std::move(which)};
    }
};

/// Two-phase real conductivity data. Thresholds c bound |E| in each phase.
struct PhasePair {
    double sigma1 = 1.0, sigma2 = 1.0;
    double c1 = 0.0, c2 = 0.0;
    double f1 = 0.5, f2 = 0.5;
};

/// Complex-conductivity variant; sigma.real() is the conductive part.
struct ComplexPhasePair {
    cplx sigma1{1.0, 0.0}, sigma2{1.0, 0.0};
    double c1 = 0.0, c2 = 0.0;
    double f1 = 0.5, f2 = 0.5;
};

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// R_perp = [[0,1],[-1,0]], a 90 degree rotation.
inline Vec2 rperp(const Vec2& v) { return {v.y(), -v.x()}; }

} // namespace breakdown
