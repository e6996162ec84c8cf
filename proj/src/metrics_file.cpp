#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "paneitz/metrics.hpp"

namespace plab {

namespace {

struct Block {
  std::size_t offset = 0;
  std::optional<std::string> name, mode, profile;
  std::optional<int> n;
  std::optional<double> r_min;
  std::map<std::string, double> params;
  bool empty() const { return !name && !mode && !profile && !n && !r_min && params.empty(); }
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double parse_number(const std::string& s, std::size_t offset) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + s + "'", offset);
  }
  if (used != s.size()) throw ParseError("trailing characters after number '" + s + "'", offset);
  return v;
}

MetricFamily build(const Block& b) {
  if (!b.name) throw ParseError("block without name=", b.offset);
  if (!b.n) throw ParseError("block '" + *b.name + "' without n=", b.offset);
  if (!b.mode) throw ParseError("block '" + *b.name + "' without mode=", b.offset);
  if (!b.profile) throw ParseError("block '" + *b.name + "' without profile=", b.offset);
  RadialProfile p = RadialProfile::parse(*b.profile).bind(b.params);
  const auto unbound = p.free_identifiers();
  if (!unbound.empty()) {
    std::string list;
    for (const auto& u : unbound) list += (list.empty() ? "" : ", ") + u;
    throw UnboundIdentifierError("block '" + *b.name + "': unbound identifiers " + list);
  }
  MetricFamily f = conformally_flat(p, conformal_mode_from_string(*b.mode), *b.n, *b.name, b.r_min.value_or(1.0));
  f.params = b.params;
  return f;
}

}  // namespace

std::vector<MetricFamily> parse_metrics_file(const std::string& text) {
  std::vector<MetricFamily> out;
  Block cur;
  auto flush = [&]() {
    if (!cur.empty()) out.push_back(build(cur));
    cur = Block{};
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    const std::size_t line_offset = pos;
    pos = eol + 1;
    // strip comments outside quotes
    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    const std::string body = trim(line.substr(0, cut));
    if (body.empty()) {
      if (cut == line.size()) flush();  // blank line ends a block; comment lines do not
      continue;
    }
    if (body.rfind("params", 0) == 0 && (body.size() == 6 || std::isspace(static_cast<unsigned char>(body[6])))) {
      std::stringstream ss(body.substr(6));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const std::string kv = trim(item);
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value in params, got '" + kv + "'", line_offset);
        cur.params[trim(kv.substr(0, eq))] = parse_number(trim(kv.substr(eq + 1)), line_offset);
      }
      if (cur.empty()) cur.offset = line_offset;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + body + "'", line_offset);
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key == "name" && cur.name) flush();
    if (cur.empty()) cur.offset = line_offset;
    if (key == "name") {
      cur.name = value;
    } else if (key == "n") {
      const double v = parse_number(value, line_offset);
      if (v != std::floor(v) || v < 2 || v > 8) throw ParseError("n must be an integer in [2, 8]", line_offset);
      cur.n = static_cast<int>(v);
    } else if (key == "mode") {
      cur.mode = value;
    } else if (key == "profile") {
      if (value.size() < 2 || value.front() != '"' || value.back() != '"')
        throw ParseError("profile must be double-quoted", line_offset);
      cur.profile = value.substr(1, value.size() - 2);
    } else if (key == "r_min") {
      cur.r_min = parse_number(value, line_offset);
    } else {
      throw ParseError("unknown key '" + key + "'", line_offset);
    }
  }
  flush();
  return out;
}

std::vector<MetricFamily> load_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_metrics_file(ss.str());
}

}  // namespace plab
