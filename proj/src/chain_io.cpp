#include "bdssd/chain_io.hpp"

#include <fstream>
#include <sstream>

namespace bdssd {

using nlohmann::json;

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first occurrence of "key", or 0 when absent.
std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void fail(std::string_view source, std::string_view text, std::string_view field,
                       const std::string& msg) {
  std::string where(source);
  if (const std::size_t line = line_of_key(text, field); line > 0)
    where += ":" + std::to_string(line);
  throw Error(ErrorCode::ParseError, where + ": field '" + std::string(field) + "': " + msg);
}

std::vector<ParsedNumber> read_numbers(const json& doc, std::string_view field, std::size_t expected,
                                       std::string_view source, std::string_view text) {
  const auto it = doc.find(std::string(field));
  if (it == doc.end()) fail(source, text, field, "missing");
  if (!it->is_array()) fail(source, text, field, "expected an array");
  if (it->size() != expected)
    fail(source, text, field,
         "has " + std::to_string(it->size()) + " entries, expected " + std::to_string(expected));
  std::vector<ParsedNumber> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& v = (*it)[i];
    std::string token;
    if (v.is_string())
      token = v.get<std::string>();
    else if (v.is_number_integer())
      token = v.dump();
    else if (v.is_number_float())
      token = shortest_repr(v.get<double>());
    else
      fail(source, text, field, "entry " + std::to_string(i) + " is not a number");
    try {
      out.push_back(parse_number(token));
    } catch (const Error& e) {
      fail(source, text, field, "entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Rational> exact_of(const std::vector<ParsedNumber>& v) {
  std::vector<Rational> out;
  for (const auto& n : v) out.push_back(n.exact);
  return out;
}

std::vector<double> float_of(const std::vector<ParsedNumber>& v) {
  std::vector<double> out;
  for (const auto& n : v) out.push_back(n.value);
  return out;
}

std::string describe(const ValidationReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) {
    if (!s.empty()) s += "; ";
    s += std::string(to_string(v.code)) + " at " + std::to_string(v.index) + ": " + v.detail;
  }
  return s;
}

}  // namespace

ChainSpec parse_chain_spec(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string(source) + ":" +
                                           std::to_string(line_of_offset(text, e.byte)) +
                                           ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, std::string(source) + ": expected an object");

  ChainSpec spec;
  const auto type_it = doc.find("type");
  if (type_it == doc.end() || !type_it->is_string()) fail(source, text, "type", "missing or not a string");
  const std::string type = type_it->get<std::string>();
  if (type == "discrete")
    spec.time = TimeType::Discrete;
  else if (type == "continuous")
    spec.time = TimeType::Continuous;
  else
    fail(source, text, "type", "expected \"discrete\" or \"continuous\", got \"" + type + "\"");

  const auto d_it = doc.find("d");
  if (d_it == doc.end() || !d_it->is_number_integer()) fail(source, text, "d", "missing or not an integer");
  spec.d = d_it->get<int>();
  if (spec.d < 1) fail(source, text, "d", "must be at least 1");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "type" && key != "d" && key != "birth" && key != "death" && key != "hold")
      fail(source, text, key, "unknown field");
  }

  const auto d = static_cast<std::size_t>(spec.d);
  const auto birth = read_numbers(doc, "birth", d, source, text);
  const auto death = read_numbers(doc, "death", d, source, text);

  try {
    if (spec.time == TimeType::Discrete) {
      std::optional<std::vector<Rational>> hold_exact;
      std::optional<std::vector<double>> hold_float;
      if (doc.contains("hold")) {
        const auto hold = read_numbers(doc, "hold", d + 1, source, text);
        hold_exact = exact_of(hold);
        hold_float = float_of(hold);
      }
      spec.exact_kernel.emplace(exact_of(birth), exact_of(death), hold_exact);
      spec.kernel.emplace(float_of(birth), float_of(death), hold_float);
      spec.report = validate_discrete(*spec.exact_kernel);
    } else {
      if (doc.contains("hold")) fail(source, text, "hold", "only discrete chains take holds");
      spec.exact_generator.emplace(exact_of(birth), exact_of(death));
      spec.generator.emplace(float_of(birth), float_of(death));
      spec.report = validate_generator(*spec.exact_generator);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ValidationError, std::string(source) + ": " + e.what());
  }
  if (!spec.report.ok())
    throw Error(ErrorCode::ValidationError, std::string(source) + ": " + describe(spec.report));
  return spec;
}

ChainSpec load_chain_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_chain_spec(buf.str(), path.string());
}

nlohmann::ordered_json to_json(const ValidationReport& rep) {
  nlohmann::ordered_json j;
  j["ok"] = rep.ok();
  j["ergodic"] = rep.ergodic;
  j["absorbing_top"] = rep.absorbing_top;
  j["monotonicity"] = std::string(to_string(rep.monotonicity));
  auto viol = nlohmann::ordered_json::array();
  for (const auto& v : rep.violations) {
    nlohmann::ordered_json e;
    e["code"] = std::string(to_string(v.code));
    e["index"] = v.index;
    e["detail"] = v.detail;
    viol.push_back(e);
  }
  j["violations"] = viol;
  return j;
}

nlohmann::ordered_json real_json(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace bdssd
