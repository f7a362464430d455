#include "liouctl/liouville.hpp"

namespace liouctl {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Amplitude:
      return "amplitude";
    case NoiseKind::Phase:
      return "phase";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "amplitude") return NoiseKind::Amplitude;
  if (name == "phase") return NoiseKind::Phase;
  throw std::invalid_argument("unknown noise kind '" + name + "'");
}

}  // namespace liouctl
