#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "xhv/errors.hpp"
#include "xhv/geom.hpp"

// Scene file format (line oriented, '#' comments):
//   gas <mass_amu> <temperature_K>
//   plane <tag>            -- facets tagged <tag> are virtual sampling planes
//   facet x1 y1 z1 x2 y2 z2 x3 y3 z3 <sticking> <outgassing> [tag]
// Coordinates in m, outgassing in mbar l s^-1 cm^-2.

namespace xhv {

namespace {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Shift the decimal exponent of a numeric token by `shift` without going
// through a binary-decimal-binary double conversion, so unit scaling by
// powers of ten cannot perturb the stored value.
std::string shift_decimal_exponent(const std::string& tok, int shift) {
  size_t epos = tok.find_first_of("eE");
  std::string mantissa = epos == std::string::npos ? tok : tok.substr(0, epos);
  long exp = 0;
  if (epos != std::string::npos) {
    try {
      exp = std::stol(tok.substr(epos + 1));
    } catch (const std::exception&) {
      return tok;  // not numeric; let the numeric parse report it
    }
  }
  exp += shift;
  return mantissa + "e" + std::to_string(exp);
}

double parse_double(const std::string& tok, int line_no, const char* what) {
  double v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    std::ostringstream msg;
    msg << "line " << line_no << ": cannot parse " << what << " '" << tok << "'";
    throw ValidationError(msg.str());
  }
  return v;
}

}  // namespace

void save_scene(const Scene& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "# xhv scene, " << s.facets.size() << " facets\n";
  out << "gas " << format_double(s.gas.mass_kg / amu) << " "
      << format_double(s.gas.temperature_k) << "\n";
  std::set<std::string> plane_tags;
  for (const auto& f : s.facets)
    if (f.virtual_plane && !f.tag.empty()) plane_tags.insert(f.tag);
  for (const auto& t : plane_tags) out << "plane " << t << "\n";
  for (const auto& f : s.facets) {
    out << "facet";
    for (const Vec3* v : {&f.v0, &f.v1, &f.v2})
      out << " " << format_double(v->x) << " " << format_double(v->y) << " "
          << format_double(v->z);
    out << " " << format_double(f.sticking) << " "
        << shift_decimal_exponent(format_double(f.outgassing), -3);
    if (!f.tag.empty()) out << " " << f.tag;
    out << "\n";
  }
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scene file '" + path + "'");
  Scene s;
  std::set<std::string> plane_tags;
  std::string line;
  int line_no = 0;
  bool saw_gas = false;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    if (kind == "gas") {
      std::string m, t;
      if (!(ss >> m >> t))
        throw ValidationError("line " + std::to_string(line_no) + ": gas record needs mass and temperature");
      s.gas.mass_kg = parse_double(m, line_no, "gas mass") * amu;
      s.gas.temperature_k = parse_double(t, line_no, "gas temperature");
      saw_gas = true;
    } else if (kind == "plane") {
      std::string tag;
      if (!(ss >> tag))
        throw ValidationError("line " + std::to_string(line_no) + ": plane record needs a tag");
      plane_tags.insert(tag);
    } else if (kind == "facet") {
      std::string tok[11];
      for (int i = 0; i < 11; ++i) {
        if (!(ss >> tok[i]))
          throw ValidationError("line " + std::to_string(line_no) +
                                ": facet record needs 11 numeric fields");
      }
      Facet f;
      double* coords[9] = {&f.v0.x, &f.v0.y, &f.v0.z, &f.v1.x, &f.v1.y,
                           &f.v1.z, &f.v2.x, &f.v2.y, &f.v2.z};
      for (int i = 0; i < 9; ++i) *coords[i] = parse_double(tok[i], line_no, "vertex coordinate");
      f.sticking = parse_double(tok[9], line_no, "sticking");
      f.outgassing = parse_double(shift_decimal_exponent(tok[10], 3), line_no, "outgassing");
      ss >> f.tag;  // optional
      s.facets.push_back(f);
    } else {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown record '" + kind + "'");
    }
  }
  if (!saw_gas) throw ValidationError("scene file is missing the gas record");
  for (auto& f : s.facets)
    if (!f.tag.empty() && plane_tags.count(f.tag)) f.virtual_plane = true;
  s.validate();
  return s;
}

}  // namespace xhv
