#include "hmhf/bubble_library.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "hmhf/errors.hpp"

namespace hmhf {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw FormatError("not a number: '" + token + "'");
  return v;
}

std::vector<LibraryEntry> standard_library(Gamma0 gamma0) {
  std::vector<LibraryEntry> lib;
  for (int k = 1; k <= 3; ++k) {
    BubbleShape s;
    s.degree = k;
    lib.push_back({"canonical_k" + std::to_string(k), make_bubble(s, gamma0)});
  }
  lib.push_back({"equivariant_k1", make_equivariant_bubble(1, 1.0, {0.0, 0.0}, gamma0)});
  {
    BubbleShape s;
    s.degree = 2;
    s.scale = 0.5;
    s.center = {1.0, 0.0};
    lib.push_back({"translated_k2", make_bubble(s, gamma0)});
  }
  {
    BubbleShape s;
    s.degree = 2;
    s.scale = 2.0;
    s.center = {-1.0, 0.5};
    s.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1.0, 1.0, 1.0).normalized())
                     .toRotationMatrix();
    lib.push_back({"rotated_k2", make_bubble(s, gamma0)});
  }
  {
    BubbleShape s;
    s.degree = 3;
    s.scale = 0.7;
    s.center = {0.3, -0.2};
    s.rotation = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.0, 1.0, 0.0)).toRotationMatrix();
    s.reflected = true;
    lib.push_back({"reflected_k3", make_bubble(s, gamma0)});
  }
  return lib;
}

namespace {

void write_coeffs(std::ostream& out, const char* key, const std::vector<Complex>& c) {
  out << key << ' ' << c.size();
  for (auto v : c) out << ' ' << format_double(v.real()) << ' ' << format_double(v.imag());
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      tokens.clear();
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (!tokens.empty() && tokens[0][0] != '#') return true;
    }
    return false;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t min_args) {
    std::vector<std::string> t;
    if (!next(t)) fail("unexpected end of file, expected '" + key + "'");
    if (t[0] != key) fail("expected '" + key + "', found '" + t[0] + "'");
    if (t.size() < min_args + 1) fail("too few values for '" + key + "'");
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("bubble library line " + std::to_string(line_no_) + ": " + msg);
  }

  double num(const std::string& s) const {
    try {
      return parse_double(s);
    } catch (const FormatError& e) {
      fail(e.what());
    }
  }

  std::vector<Complex> coeffs(const std::string& key) {
    auto t = expect(key, 1);
    const auto n = static_cast<std::size_t>(num(t[1]));
    if (t.size() != 2 + 2 * n) fail("coefficient count mismatch for '" + key + "'");
    std::vector<Complex> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = {num(t[2 + 2 * i]), num(t[3 + 2 * i])};
    return c;
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_library(std::ostream& out, const std::vector<LibraryEntry>& lib) {
  out << "# hmhf bubble library v1\n";
  for (const auto& e : lib) {
    const BubbleMap& b = e.bubble;
    out << "bubble " << e.name << '\n';
    out << "degree " << b.degree() << '\n';
    out << "scale " << format_double(b.scale()) << '\n';
    out << "center " << format_double(b.center().x) << ' ' << format_double(b.center().y) << '\n';
    out << "gamma0 " << format_double(b.gamma0()) << '\n';
    out << "reflected " << (b.map().reflected() ? 1 : 0) << '\n';
    write_coeffs(out, "numerator", b.map().numerator());
    write_coeffs(out, "denominator", b.map().denominator());
    if (const auto& s = b.shape()) {
      out << "shape " << s->degree << ' ' << format_double(s->scale) << ' '
          << format_double(s->center.x) << ' ' << format_double(s->center.y);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out << ' ' << format_double(s->rotation(i, j));
      out << '\n';
    }
    out << "end\n";
  }
}

std::vector<LibraryEntry> read_library(std::istream& in) {
  Reader r(in);
  std::vector<LibraryEntry> lib;
  std::vector<std::string> t;
  while (r.next(t)) {
    if (t[0] != "bubble" || t.size() != 2) r.fail("expected 'bubble <name>'");
    const std::string name = t[1];
    const int degree = static_cast<int>(r.num(r.expect("degree", 1)[1]));
    const double scale = r.num(r.expect("scale", 1)[1]);
    const auto c = r.expect("center", 2);
    const Point2 center{r.num(c[1]), r.num(c[2])};
    const double g0 = r.num(r.expect("gamma0", 1)[1]);
    const bool reflected = r.expect("reflected", 1)[1] == "1";
    auto p = r.coeffs("numerator");
    auto q = r.coeffs("denominator");
    std::optional<BubbleShape> shape;
    if (!r.next(t)) r.fail("unexpected end of file in bubble '" + name + "'");
    if (t[0] == "shape") {
      if (t.size() != 14) r.fail("shape needs 13 values");
      BubbleShape s;
      s.degree = static_cast<int>(r.num(t[1]));
      s.scale = r.num(t[2]);
      s.center = {r.num(t[3]), r.num(t[4])};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.rotation(i, j) = r.num(t[5 + 3 * i + j]);
      s.reflected = reflected;
      shape = s;
      if (!r.next(t)) r.fail("unexpected end of file in bubble '" + name + "'");
    }
    if (t[0] != "end") r.fail("expected 'end'");
    RationalMap map(std::move(p), std::move(q), reflected);
    if (map.degree() != degree) r.fail("degree does not match coefficients");
    lib.push_back({name, BubbleMap::with_cache(std::move(map), scale, center, g0, shape)});
  }
  return lib;
}

void write_library_file(const std::string& path, const std::vector<LibraryEntry>& lib) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_library(out, lib);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

std::vector<LibraryEntry> read_library_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return read_library(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace hmhf
