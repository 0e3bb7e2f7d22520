#include "usaug/error.hpp"

namespace usaug {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::BorderViolation: return "BorderViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingNeighborValue: return "MissingNeighborValue";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateTransform: return "DegenerateTransform";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::NoValidPlacement: return "NoValidPlacement";
    case ErrorCode::PlacementOutOfBounds: return "PlacementOutOfBounds";
    case ErrorCode::OverlapViolation: return "OverlapViolation";
    case ErrorCode::NoDonorInstances: return "NoDonorInstances";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::Io: return "Io";
  }
  return "UnknownError";
}

}  // namespace usaug
