// SPDX-License-Identifier: Apache-2.0
//
// Certified eigenvalue enclosures from second-order-spectrum points. The
// basic interval [Re z - |Im z|, Re z + |Im z|] always meets the spectrum;
// when an a-priori segment (a, b) isolating exactly one eigenvalue is known
// and z lies in the open disk over (a, b), the much tighter interval
//   ( Re z - |Im z|^2/(b - Re z),  Re z + |Im z|^2/(Re z - a) )
// is certified as well.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "knd/errors.hpp"
#include "knd/quadratic_spectrum.hpp"

namespace knd {

/// A real interval asserted by the caller to contain exactly one simple
/// eigenvalue. The one-eigenvalue contract cannot be checked internally; the
/// provenance label ("analytic", "numeric", "user") travels with every
/// derived output so certification claims stay auditable.
struct AprioriSegment {
  double a = 0.0;
  double b = 0.0;
  std::string label = "user";
};

struct Enclosure {
  enum class Kind { kBasic, kSharpened };
  double lower = 0.0;
  double upper = 0.0;
  Kind kind = Kind::kBasic;
  ConjugatePair source{};
  std::optional<AprioriSegment> segment{};

  double width() const { return upper - lower; }
};

/// [center - height, center + height]; guaranteed to intersect the spectrum.
inline Enclosure basic_enclosure(const ConjugatePair& pair) {
  Enclosure e;
  e.lower = pair.center() - pair.height();
  e.upper = pair.center() + pair.height();
  e.kind = Enclosure::Kind::kBasic;
  e.source = pair;
  return e;
}

/// Open disk whose diameter is the segment (a, b); the boundary is excluded.
inline bool disk_contains(double a, double b, Complex z) {
  if (!(a < b)) throw DegenerateSegment("disk needs a < b");
  return std::abs(z - Complex(0.5 * (a + b), 0.0)) < 0.5 * (b - a);
}

/// Sharpened enclosure under the one-eigenvalue contract of seg. Endpoints
/// are rounded outward by one ulp so the stored closed interval always
/// contains the exact-arithmetic open interval. Throws DiskViolation if
/// z_plus is not inside the disk over (a, b) -- the formula is not certified
/// there.
inline Enclosure sharpened_enclosure(const ConjugatePair& pair,
                                     const AprioriSegment& seg) {
  if (!(seg.a < seg.b)) throw DegenerateSegment("segment needs a < b");
  if (!disk_contains(seg.a, seg.b, pair.z_plus)) {
    throw DiskViolation("spectrum point is not inside the disk over the segment");
  }
  const double c = pair.center(), t = pair.height();
  const double inf = std::numeric_limits<double>::infinity();
  Enclosure e;
  e.lower = std::nextafter(c - t * t / (seg.b - c), -inf);
  e.upper = std::nextafter(c + t * t / (c - seg.a), inf);
  e.kind = Enclosure::Kind::kSharpened;
  e.source = pair;
  e.segment = seg;
  return e;
}

/// Narrowest certified interval around the pair nearest the target: the basic
/// enclosure, improved by any supplied segment that contains the target and
/// whose disk contains the point (a sharpened interval wins only when
/// strictly narrower).
inline Enclosure best_enclosure(const SecondOrderSpectrum& spec, double target,
                                const std::vector<AprioriSegment>& segments = {}) {
  const auto pairs = extract_pairs(spec);
  const ConjugatePair pair = nearest_pair(pairs, target);
  Enclosure best = basic_enclosure(pair);
  for (const AprioriSegment& seg : segments) {
    if (!(seg.a < target && target < seg.b)) continue;
    if (!disk_contains(seg.a, seg.b, pair.z_plus)) continue;
    const Enclosure sharp = sharpened_enclosure(pair, seg);
    if (sharp.width() < best.width()) best = sharp;
  }
  return best;
}

/// Parses the a-priori segment file format: UTF-8 text, one "a b label" per
/// line, '#' starts a comment, fields whitespace-separated, decimals with
/// '.'. Raises ParseError with the line number on malformed rows and
/// DegenerateSegment when a >= b.
inline std::vector<AprioriSegment> load_apriori(std::istream& in) {
  std::vector<AprioriSegment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string sa, sb, label;
    if (!(fields >> sa)) continue;  // blank line
    if (!(fields >> sb >> label)) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 'a b label'");
    }
    std::string extra;
    if (fields >> extra) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": trailing content '" + extra + "'");
    }
    std::size_t pos_a = 0, pos_b = 0;
    double a = 0.0, b = 0.0;
    try {
      a = std::stod(sa, &pos_a);
      b = std::stod(sb, &pos_b);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": malformed number");
    }
    if (pos_a != sa.size() || pos_b != sb.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": malformed number");
    }
    if (!(a < b)) {
      throw DegenerateSegment("line " + std::to_string(lineno) + ": a = " + sa +
                              " is not below b = " + sb);
    }
    out.push_back(AprioriSegment{a, b, label});
  }
  return out;
}

inline std::vector<AprioriSegment> load_apriori(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open a-priori segment file '" + path + "'");
  return load_apriori(in);
}

}  // namespace knd
