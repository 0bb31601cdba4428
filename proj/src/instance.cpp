#include "ffcg/instance.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ffcg/errors.hpp"

namespace ffcg {

using json = nlohmann::json;

// ---- CSP -------------------------------------------------------------------

void CspInstance::validate() const {
  if (roll_length <= 0) throw InvalidRange("roll length must be positive");
  if (weights.empty()) throw InvalidRange("at least one item type is required");
  if (weights.size() != demands.size())
    throw InvalidRange("weights and demands differ in length");
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0 || weights[j] > roll_length)
      throw InvalidRange("item " + std::to_string(j) + " weight " + std::to_string(weights[j]) +
                         " outside [1, " + std::to_string(roll_length) + "]");
    if (demands[j] < 1) throw InvalidRange("item " + std::to_string(j) + " demand below 1");
  }
}

CspInstance generate_csp(std::uint64_t seed, int roll_length, int item_types) {
  const int lo = std::max(1, (roll_length + 9) / 10);
  const int hi = std::max(lo, (8 * roll_length + 9) / 10);
  return generate_csp(seed, roll_length, item_types, {lo, hi}, {1, 50});
}

CspInstance generate_csp(std::uint64_t seed, int roll_length, int item_types,
                         IntRange weight_range, IntRange demand_range) {
  if (roll_length <= 0) throw InvalidRange("roll length must be positive");
  if (item_types < 1) throw InvalidRange("item type count must be at least 1");
  if (weight_range.lo < 1 || weight_range.hi > roll_length || weight_range.lo > weight_range.hi)
    throw InvalidRange("weight range must lie within [1, roll length]");
  if (demand_range.lo < 1 || demand_range.lo > demand_range.hi)
    throw InvalidRange("demand range must lie within [1, inf)");

  std::mt19937_64 rng(seed);
  CspInstance out;
  out.name = "csp-n" + std::to_string(roll_length) + "-m" + std::to_string(item_types) + "-s" +
             std::to_string(seed);
  out.roll_length = roll_length;

  const int span = weight_range.hi - weight_range.lo + 1;
  if (span >= item_types) {
    // distinct weights, like real item types
    std::vector<int> pool(span);
    std::iota(pool.begin(), pool.end(), weight_range.lo);
    std::shuffle(pool.begin(), pool.end(), rng);
    out.weights.assign(pool.begin(), pool.begin() + item_types);
  } else {
    std::uniform_int_distribution<int> w(weight_range.lo, weight_range.hi);
    for (int j = 0; j < item_types; ++j) out.weights.push_back(w(rng));
  }
  std::uniform_int_distribution<int> d(demand_range.lo, demand_range.hi);
  for (int j = 0; j < item_types; ++j) out.demands.push_back(d(rng));
  out.validate();
  return out;
}

// ---- VRPTW -----------------------------------------------------------------

double truncated_distance(const VrptwSite& a, const VrptwSite& b) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  return std::floor(d * 10.0 + 1e-9) / 10.0;
}

VrptwInstance::VrptwInstance(std::string name, int vehicles, double capacity,
                             std::vector<VrptwSite> sites)
    : name_(std::move(name)), vehicles_(vehicles), capacity_(capacity), sites_(std::move(sites)) {
  if (sites_.empty()) throw InvalidRange("a VRPTW instance needs at least a depot row");
  const int v = vertex_count();
  travel_.resize(v, v);
  for (int i = 0; i < v; ++i)
    for (int j = 0; j < v; ++j) travel_(i, j) = truncated_distance(site(i), site(j));
}

void VrptwInstance::validate() const {
  if (sites_.empty()) throw InvalidRange("missing depot");
  if (capacity_ <= 0) throw InvalidRange("vehicle capacity must be positive");
  const VrptwSite& depot = sites_[0];
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const auto& s = sites_[i];
    if (s.ready > s.due)
      throw InvalidRange("site " + std::to_string(i) + " has ready time after due date");
    if (s.demand < 0 || s.demand > capacity_)
      throw InvalidRange("site " + std::to_string(i) + " demand exceeds vehicle capacity");
    if (s.service < 0) throw InvalidRange("negative service time");
    if (i > 0 && (s.ready < depot.ready || s.due > depot.due))
      throw InvalidRange("depot window does not cover site " + std::to_string(i));
  }
}

VrptwInstance generate_vrptw(std::uint64_t seed, int n_customers,
                             const VrptwGeneratorOptions& options) {
  if (n_customers < 1) throw InvalidCount("at least one customer is required");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, 100);
  std::uniform_int_distribution<int> demand(options.demand.lo, options.demand.hi);
  std::uniform_int_distribution<int> width(options.window_width.lo, options.window_width.hi);

  std::vector<VrptwSite> sites;
  sites.push_back({0, 50, 50, 0, 0, options.horizon, 0});
  for (int i = 1; i <= n_customers; ++i) {
    VrptwSite s;
    s.id = i;
    s.service = options.service;
    s.demand = demand(rng);
    double earliest = 0, latest = -1;
    // Resample until the customer can be served from and returned to the depot.
    while (latest < earliest) {
      s.x = coord(rng);
      s.y = coord(rng);
      earliest = std::ceil(truncated_distance(sites[0], s));
      latest = std::floor(options.horizon - options.service - truncated_distance(s, sites[0]));
    }
    std::uniform_real_distribution<double> centre_dist(earliest, latest);
    const double centre = std::round(centre_dist(rng));
    const double half = width(rng) / 2.0;
    s.ready = std::max(0.0, std::floor(centre - half));
    s.due = std::min(latest, std::ceil(centre + half));
    if (s.due < earliest) s.due = earliest;
    if (s.ready > s.due) s.ready = s.due;
    sites.push_back(s);
  }
  VrptwInstance out("vrptw-c" + std::to_string(n_customers) + "-s" + std::to_string(seed),
                    options.vehicles, options.capacity, std::move(sites));
  out.validate();
  return out;
}

VrptwInstance truncate_solomon(const VrptwInstance& instance, int n) {
  if (n < 1 || n > instance.n_customers())
    throw InvalidCount("cannot keep " + std::to_string(n) + " of " +
                       std::to_string(instance.n_customers()) + " customers");
  std::vector<VrptwSite> sites(instance.sites().begin(), instance.sites().begin() + n + 1);
  std::string name = instance.name();
  if (n != instance.n_customers()) name += "-first" + std::to_string(n);
  return VrptwInstance(std::move(name), instance.vehicles(), instance.capacity(),
                       std::move(sites));
}

VrptwInstance truncate_solomon_random(const VrptwInstance& instance, std::uint64_t seed,
                                      int min_n, int max_n) {
  const int hi = std::min(max_n, instance.n_customers());
  if (min_n < 1 || min_n > hi) throw InvalidCount("empty customer-count range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(min_n, hi);
  return truncate_solomon(instance, pick(rng));
}

// ---- text helpers ------------------------------------------------------------

namespace {

struct Token {
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

std::vector<std::vector<Token>> tokenize_lines(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  std::size_t line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      toks.push_back({line.substr(i, j - i), line_no, i + 1});
      i = j;
    }
    lines.push_back(std::move(toks));
    if (end == text.size()) break;
    pos = end + 1;
    ++line_no;
  }
  return lines;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

template <typename T>
T expect_number(const Token& tok, const char* what) {
  T v{};
  if (!parse_number(tok.text, v))
    throw ParseError(std::string("expected ") + what + ", found '" + std::string(tok.text) + "'",
                     tok.line, tok.column);
  return v;
}

bool all_numeric(const std::vector<Token>& toks) {
  for (const auto& t : toks) {
    double v;
    if (!parse_number(t.text, v)) return false;
  }
  return !toks.empty();
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

// ---- BPPLIB ------------------------------------------------------------------

CspInstance parse_bpplib(std::string_view text, std::string name) {
  const auto lines = tokenize_lines(text);
  std::vector<Token> toks;
  for (const auto& l : lines)
    for (const auto& t : l) toks.push_back(t);

  std::size_t cursor = 0;
  auto next = [&](const char* what) -> const Token& {
    if (cursor >= toks.size()) {
      const std::size_t line = lines.empty() ? 1 : lines.size();
      throw ParseError(std::string("unexpected end of input, expected ") + what, line, 1);
    }
    return toks[cursor++];
  };

  CspInstance out;
  out.name = std::move(name);
  const Token& m_tok = next("item type count");
  const int m = expect_number<int>(m_tok, "item type count");
  if (m < 1) throw ParseError("item type count must be positive", m_tok.line, m_tok.column);
  const Token& n_tok = next("roll length");
  out.roll_length = expect_number<int>(n_tok, "roll length");
  for (int j = 0; j < m; ++j) {
    const Token& w = next("item weight");
    out.weights.push_back(expect_number<int>(w, "item weight"));
    const Token& d = next("item demand");
    if (d.line != w.line)
      throw ParseError("item line must hold weight and demand", w.line, w.column);
    out.demands.push_back(expect_number<int>(d, "item demand"));
  }
  if (cursor != toks.size())
    throw ParseError("trailing data after " + std::to_string(m) + " items", toks[cursor].line,
                     toks[cursor].column);
  try {
    out.validate();
  } catch (const InvalidRange& e) {
    throw ParseError(e.what(), n_tok.line, n_tok.column);
  }
  return out;
}

std::string serialize_bpplib(const CspInstance& instance) {
  std::ostringstream os;
  os << instance.item_types() << '\n' << instance.roll_length << '\n';
  for (int j = 0; j < instance.item_types(); ++j)
    os << instance.weights[j] << ' ' << instance.demands[j] << '\n';
  return os.str();
}

// ---- Solomon -----------------------------------------------------------------

VrptwInstance parse_solomon(std::string_view text) {
  const auto lines = tokenize_lines(text);
  std::size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size() && lines[i].empty()) ++i;
  };
  auto fail_eof = [&](const char* what) {
    throw ParseError(std::string("unexpected end of input, expected ") + what, lines.size(), 1);
  };

  skip_blank();
  if (i >= lines.size()) fail_eof("instance name");
  std::string name;
  for (const auto& t : lines[i]) name += (name.empty() ? "" : " ") + std::string(t.text);
  ++i;

  auto find_section = [&](std::string_view key) {
    skip_blank();
    if (i >= lines.size()) fail_eof(std::string(key).c_str());
    if (lines[i].size() != 1 || lines[i][0].text != key)
      throw ParseError("expected section '" + std::string(key) + "'", lines[i][0].line,
                       lines[i][0].column);
    ++i;
    // column header lines
    while (i < lines.size() && (lines[i].empty() || !all_numeric(lines[i]))) {
      if (!lines[i].empty() && (lines[i][0].text == "CUSTOMER" || lines[i][0].text == "VEHICLE"))
        throw ParseError("section '" + std::string(key) + "' has no data", lines[i][0].line,
                         lines[i][0].column);
      ++i;
    }
  };

  find_section("VEHICLE");
  if (i >= lines.size()) fail_eof("vehicle count and capacity");
  const auto& vrow = lines[i];
  if (vrow.size() != 2)
    throw ParseError("vehicle line must hold count and capacity", vrow[0].line, vrow[0].column);
  const int vehicles = expect_number<int>(vrow[0], "vehicle count");
  const double capacity = expect_number<double>(vrow[1], "capacity");
  ++i;

  find_section("CUSTOMER");
  std::vector<VrptwSite> sites;
  for (; i < lines.size(); ++i) {
    const auto& row = lines[i];
    if (row.empty()) continue;
    if (row.size() != 7)
      throw ParseError("customer row must have 7 fields, found " + std::to_string(row.size()),
                       row[0].line, row.back().column);
    VrptwSite s;
    s.id = expect_number<int>(row[0], "customer id");
    if (s.id != static_cast<int>(sites.size()))
      throw ParseError("customer ids must be consecutive from 0", row[0].line, row[0].column);
    s.x = expect_number<double>(row[1], "x coordinate");
    s.y = expect_number<double>(row[2], "y coordinate");
    s.demand = expect_number<double>(row[3], "demand");
    s.ready = expect_number<double>(row[4], "ready time");
    s.due = expect_number<double>(row[5], "due date");
    s.service = expect_number<double>(row[6], "service time");
    sites.push_back(s);
  }
  if (sites.empty()) fail_eof("depot row");
  VrptwInstance out(name, vehicles, capacity, std::move(sites));
  try {
    out.validate();
  } catch (const InvalidRange& e) {
    throw ParseError(e.what(), lines.size(), 1);
  }
  return out;
}

std::string serialize_solomon(const VrptwInstance& instance) {
  std::ostringstream os;
  os << instance.name() << "\n\nVEHICLE\nNUMBER     CAPACITY\n  " << instance.vehicles()
     << "         " << format_number(instance.capacity()) << "\n\nCUSTOMER\n"
     << "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n\n";
  for (const auto& s : instance.sites()) {
    os << "  " << s.id << "  " << format_number(s.x) << "  " << format_number(s.y) << "  "
       << format_number(s.demand) << "  " << format_number(s.ready) << "  "
       << format_number(s.due) << "  " << format_number(s.service) << '\n';
  }
  return os.str();
}

// ---- JSON --------------------------------------------------------------------

std::string to_json(const CspInstance& instance) {
  json j{{"format", "ffcg-instance"},
         {"version", 1},
         {"problem", "csp"},
         {"name", instance.name},
         {"roll_length", instance.roll_length},
         {"weights", instance.weights},
         {"demands", instance.demands}};
  return j.dump(2);
}

std::string to_json(const VrptwInstance& instance) {
  json sites = json::array();
  for (const auto& s : instance.sites())
    sites.push_back({{"id", s.id},
                     {"x", s.x},
                     {"y", s.y},
                     {"demand", s.demand},
                     {"ready", s.ready},
                     {"due", s.due},
                     {"service", s.service}});
  json j{{"format", "ffcg-instance"},
         {"version", 1},
         {"problem", "vrptw"},
         {"name", instance.name()},
         {"vehicles", instance.vehicles()},
         {"capacity", instance.capacity()},
         {"sites", sites}};
  return j.dump(2);
}

namespace {

json parse_json_checked(std::string_view text, const char* problem) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, e.byte);
  }
  if (!j.is_object() || j.value("problem", "") != problem)
    throw ParseError(std::string("not a ") + problem + " instance document", 1, 1);
  return j;
}

}  // namespace

CspInstance csp_from_json(std::string_view text) {
  const json j = parse_json_checked(text, "csp");
  CspInstance out;
  try {
    out.name = j.at("name").get<std::string>();
    out.roll_length = j.at("roll_length").get<int>();
    out.weights = j.at("weights").get<std::vector<int>>();
    out.demands = j.at("demands").get<std::vector<int>>();
    out.validate();
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 1, 1);
  } catch (const InvalidRange& e) {
    throw ParseError(e.what(), 1, 1);
  }
  return out;
}

VrptwInstance vrptw_from_json(std::string_view text) {
  const json j = parse_json_checked(text, "vrptw");
  try {
    std::vector<VrptwSite> sites;
    for (const auto& s : j.at("sites"))
      sites.push_back({s.at("id").get<int>(), s.at("x").get<double>(), s.at("y").get<double>(),
                       s.at("demand").get<double>(), s.at("ready").get<double>(),
                       s.at("due").get<double>(), s.at("service").get<double>()});
    VrptwInstance out(j.at("name").get<std::string>(), j.at("vehicles").get<int>(),
                      j.at("capacity").get<double>(), std::move(sites));
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 1, 1);
  } catch (const InvalidRange& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

AnyInstance load_instance(const std::filesystem::path& path, ProblemKind kind) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.extension() == ".json") {
    if (kind == ProblemKind::Csp) return csp_from_json(text);
    return vrptw_from_json(text);
  }
  if (kind == ProblemKind::Csp) return parse_bpplib(text, path.stem().string());
  return parse_solomon(text);
}

void save_instance(const std::filesystem::path& path, const AnyInstance& instance) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  const bool as_json = path.extension() == ".json";
  std::visit(
      [&](const auto& inst) {
        using T = std::decay_t<decltype(inst)>;
        if (as_json) {
          out << to_json(inst) << '\n';
        } else if constexpr (std::is_same_v<T, CspInstance>) {
          out << serialize_bpplib(inst);
        } else {
          out << serialize_solomon(inst);
        }
      },
      instance);
}

// ---- dataset division ---------------------------------------------------------

namespace {

template <typename Instance>
std::string content_key(const Instance& i) {
  return to_json(i);
}

}  // namespace

template <typename Instance>
void DatasetSplit<Instance>::check_disjoint() const {
  std::set<std::string> names, contents;
  for (const auto* part : {&train, &validation, &test}) {
    std::set<std::string> part_names, part_contents;
    for (const auto& inst : *part) {
      std::string n;
      if constexpr (std::is_same_v<Instance, CspInstance>) n = inst.name; else n = inst.name();
      auto c = content_key(inst);
      // The serialized form includes the name; strip it for content identity.
      const auto pos = c.find("\"name\"");
      if (pos != std::string::npos) c.erase(pos, c.find('\n', pos) - pos);
      if (names.count(n) || contents.count(c))
        throw InvalidArgument("instance " + n + " appears in more than one split");
      part_names.insert(n);
      part_contents.insert(c);
    }
    names.insert(part_names.begin(), part_names.end());
    contents.insert(part_contents.begin(), part_contents.end());
  }
}

template struct DatasetSplit<CspInstance>;
template struct DatasetSplit<VrptwInstance>;

std::vector<CspDivisionRow> csp_reference_division() {
  return {{50, 160, 10, 182}, {100, 160, 10, 0}, {200, 80, 10, 46}, {750, 0, 0, 15},
          {1000, 0, 0, 22}};
}

DatasetSplit<CspInstance> make_csp_split(std::uint64_t seed,
                                         const std::vector<CspDivisionRow>& rows,
                                         IntRange item_types) {
  if (item_types.lo < 1 || item_types.lo > item_types.hi)
    throw InvalidRange("item type range must be nonempty and positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m_dist(item_types.lo, item_types.hi);
  DatasetSplit<CspInstance> out;
  for (const auto& row : rows) {
    auto fill = [&](std::vector<CspInstance>& into, int count) {
      for (int k = 0; k < count; ++k) {
        const int m = std::min(m_dist(rng), (8 * row.roll_length + 9) / 10);
        into.push_back(generate_csp(rng(), row.roll_length, m));
      }
    };
    fill(out.train, row.train);
    fill(out.validation, row.validation);
    fill(out.test, row.test);
  }
  out.check_disjoint();
  return out;
}

DatasetSplit<VrptwInstance> make_vrptw_split(std::uint64_t seed,
                                             const std::vector<VrptwInstance>& train_bases,
                                             const std::vector<VrptwInstance>& test_bases,
                                             int train_per_base, int test_per_base,
                                             IntRange customers) {
  std::mt19937_64 rng(seed);
  DatasetSplit<VrptwInstance> out;
  auto fill = [&](const std::vector<VrptwInstance>& bases, int per_base,
                  std::vector<VrptwInstance>& into) {
    for (const auto& base : bases) {
      std::set<int> used;
      const int hi = std::min(customers.hi, base.n_customers());
      for (int k = 0; k < per_base && static_cast<int>(used.size()) < hi - customers.lo + 1;
           ++k) {
        VrptwInstance inst = truncate_solomon_random(base, rng(), customers.lo, customers.hi);
        // One truncation per size per base keeps the splits duplicate-free.
        if (!used.insert(inst.n_customers()).second) {
          --k;
          continue;
        }
        into.push_back(std::move(inst));
      }
    }
  };
  fill(train_bases, train_per_base, out.train);
  fill(test_bases, test_per_base, out.test);
  out.check_disjoint();
  return out;
}

}  // namespace ffcg
