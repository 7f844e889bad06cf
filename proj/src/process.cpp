#include "detmart/process.hpp"

#include <stdexcept>

namespace detmart {

ProcessKind ProcessKind::besq(double nu) {
  if (!(nu > -1.0)) throw std::domain_error("BESQ index must exceed -1");
  return {Tag::BESQ, nu};
}

ProcessKind ProcessKind::bes(double nu) {
  if (!(nu > -1.0)) throw std::domain_error("BES index must exceed -1");
  return {Tag::BES, nu};
}

std::complex<double> ProcessKind::transform_constant() const {
  switch (tag) {
    case Tag::BM: return {0.0, 1.0};
    case Tag::BESQ: return {-1.0, 0.0};
    default: throw std::invalid_argument("no transform constant for " + name());
  }
}

std::string ProcessKind::name() const {
  switch (tag) {
    case Tag::BM: return "BM";
    case Tag::BESQ: return "BESQ";
    case Tag::BES: return "BES";
    case Tag::RW: return "RW";
  }
  return "?";
}

ProcessKind ProcessKind::parse(const std::string& name, double nu) {
  if (name == "BM") return bm();
  if (name == "BESQ") return besq(nu);
  if (name == "BES") return bes(nu);
  if (name == "RW") return rw();
  throw std::invalid_argument("unknown process kind '" + name + "'");
}

bool operator==(const ProcessKind& a, const ProcessKind& b) {
  if (a.tag != b.tag) return false;
  if (a.tag == ProcessKind::Tag::BESQ || a.tag == ProcessKind::Tag::BES) return a.nu == b.nu;
  return true;
}

}  // namespace detmart
