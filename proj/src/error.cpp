#include "encircle/error.hpp"

namespace encircle {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroRadius: return "ZeroRadius";
        case ErrorCode::NotStarShaped: return "NotStarShaped";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::NoSegment: return "NoSegment";
        case ErrorCode::CriticalPoint: return "CriticalPoint";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace encircle
