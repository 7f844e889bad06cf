#pragma once

#include <complex>
#include <string>

namespace detmart {

struct ProcessKind {
  enum class Tag { BM, BESQ, BES, RW };

  Tag tag = Tag::BM;
  double nu = 0.0;

  static ProcessKind bm() { return {Tag::BM, 0.0}; }
  static ProcessKind besq(double nu);
  static ProcessKind bes(double nu);
  static ProcessKind rw() { return {Tag::RW, 0.0}; }

  bool discrete_time() const { return tag == Tag::RW; }
  // c with M[(cW)^n | (t,x)] = m_n(t,x); only BM and BESQ have one.
  std::complex<double> transform_constant() const;
  std::string name() const;
  static ProcessKind parse(const std::string& name, double nu);
};

bool operator==(const ProcessKind& a, const ProcessKind& b);

}  // namespace detmart
