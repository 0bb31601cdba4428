#include "ffcg/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "ffcg/errors.hpp"

namespace ffcg {

namespace {

constexpr const char* kBenchHeader = "instance,policy,iters,cols_added,ms,objective,converged";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << kBenchHeader << '\n';
  const auto old = out.precision(17);
  for (const auto& r : rows)
    out << r.instance << ',' << r.policy << ',' << r.iters << ',' << r.cols_added << ',' << r.ms
        << ',' << r.objective << ',' << (r.converged ? 1 : 0) << '\n';
  out.precision(old);
}

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty bench table", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBenchHeader) throw ParseError("unexpected bench header '" + line + "'", 1, 1);
  std::vector<BenchRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7)
      throw ParseError("expected 7 fields, found " + std::to_string(f.size()), lineno, 1);
    BenchRow r;
    r.instance = f[0];
    r.policy = f[1];
    try {
      std::size_t used = 0;
      auto check = [&](const std::string& s) {
        if (used != s.size()) throw std::invalid_argument(s);
      };
      r.iters = std::stoi(f[2], &used), check(f[2]);
      r.cols_added = std::stoi(f[3], &used), check(f[3]);
      r.ms = std::stod(f[4], &used), check(f[4]);
      r.objective = std::stod(f[5], &used), check(f[5]);
      if (f[6] != "0" && f[6] != "1") throw std::invalid_argument(f[6]);
      r.converged = f[6] == "1";
    } catch (const std::logic_error&) {
      throw ParseError("malformed bench value", lineno, 1);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_bench_table(std::span<const PolicyStats> stats) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "policy" << std::right << std::setw(6) << "n"
     << std::setw(18) << "#Itr" << std::setw(18) << "#Col" << std::setw(20) << "Time(ms)"
     << std::setw(14) << "Obj" << '\n';
  auto cell = [](double mean, double sd, int prec) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(prec) << mean << " +- " << sd;
    return c.str();
  };
  for (const auto& s : stats)
    os << std::left << std::setw(12) << s.policy << std::right << std::setw(6) << s.instances
       << std::setw(18) << cell(s.mean_iters, s.sd_iters, 2) << std::setw(18)
       << cell(s.mean_cols, s.sd_cols, 2) << std::setw(20) << cell(s.mean_ms, s.sd_ms, 1)
       << std::setw(14) << std::fixed << std::setprecision(4) << s.mean_objective << '\n';
  return os.str();
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

Curve average_padded(std::span<const std::vector<double>> series) {
  std::size_t len = 0;
  int n = 0;
  for (const auto& s : series)
    if (!s.empty()) {
      len = std::max(len, s.size());
      ++n;
    }
  Curve c;
  c.mean.assign(len, 0.0);
  c.sd.assign(len, 0.0);
  if (n == 0) return c;
  auto at = [](const std::vector<double>& s, std::size_t t) { return t < s.size() ? s[t] : s.back(); };
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0;
    for (const auto& s : series)
      if (!s.empty()) sum += at(s, t);
    c.mean[t] = sum / n;
    double sq = 0;
    for (const auto& s : series)
      if (!s.empty()) sq += (at(s, t) - c.mean[t]) * (at(s, t) - c.mean[t]);
    c.sd[t] = std::sqrt(sq / n);
  }
  return c;
}

Curve convergence_curve(std::span<const CgTrace> traces) {
  std::vector<std::vector<double>> normalized;
  for (const auto& tr : traces) {
    std::vector<double> obj;
    for (const auto& r : tr.rows) obj.push_back(r.obj);
    normalized.push_back(minmax_normalize(obj));
  }
  return average_padded(normalized);
}

namespace {

// n_selected of the rows that added columns, in iteration order.
std::vector<int> selections(const CgTrace& tr) {
  std::vector<int> out;
  for (const auto& r : tr.rows)
    if (r.n_selected > 0) out.push_back(r.n_selected);
  return out;
}

}  // namespace

ColumnHistogram column_histogram(std::span<const CgTrace> traces) {
  ColumnHistogram h;
  std::vector<double> sums;
  for (const auto& tr : traces) {
    const auto sel = selections(tr);
    if (sel.size() > sums.size()) {
      sums.resize(sel.size(), 0.0);
      h.counts.resize(sel.size(), 0);
    }
    for (std::size_t t = 0; t < sel.size(); ++t) {
      sums[t] += sel[t];
      ++h.counts[t];
    }
  }
  h.mean_selected.resize(sums.size());
  for (std::size_t t = 0; t < sums.size(); ++t) h.mean_selected[t] = sums[t] / h.counts[t];
  return h;
}

QuartileSelection selection_quartiles(std::span<const CgTrace> traces) {
  QuartileSelection q;
  double first = 0, last = 0;
  long n_first = 0, n_last = 0;
  for (const auto& tr : traces) {
    const auto sel = selections(tr);
    if (sel.empty()) continue;
    ++q.runs;
    const std::size_t k = (sel.size() + 3) / 4;
    for (std::size_t t = 0; t < k; ++t) first += sel[t];
    for (std::size_t t = sel.size() - k; t < sel.size(); ++t) last += sel[t];
    n_first += static_cast<long>(k);
    n_last += static_cast<long>(k);
  }
  if (n_first > 0) q.first = first / static_cast<double>(n_first);
  if (n_last > 0) q.last = last / static_cast<double>(n_last);
  return q;
}

// ---- SVG ---------------------------------------------------------------------------

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 64, kRight = 150, kTop = 40, kBottom = 52;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x_max, y_min, y_max;
  double px(double x) const {
    return kLeft + (x_max > 0 ? x / x_max : 0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    const double span = y_max - y_min;
    return kHeight - kBottom - (span > 0 ? (y - y_min) / span : 0) * (kHeight - kTop - kBottom);
  }
};

void open_svg(std::ostringstream& os, const Frame& f, const std::string& title,
              const std::string& x_label, const std::string& y_label, int x_ticks) {
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  const double x0 = f.px(0), x1 = f.px(f.x_max), y0 = f.py(f.y_min), y1 = f.py(f.y_max);
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = f.y_min + (f.y_max - f.y_min) * k / 4.0;
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << f.py(v) + 4 << "\" text-anchor=\"end\">" << v
       << "</text>\n";
  }
  for (int k = 0; k <= x_ticks; ++k) {
    const double v = f.x_max * k / x_ticks;
    os << "<text x=\"" << f.px(v) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
       << std::setprecision(0) << v << std::setprecision(2) << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (y0 + y1) / 2 << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& os, std::size_t i, const std::string& name) {
  const double y = kTop + 10 + 18.0 * static_cast<double>(i);
  const double x = kWidth - kRight + 14;
  os << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"14\" height=\"10\" fill=\"" << color(i)
     << "\"/>\n<text x=\"" << x + 20 << "\" y=\"" << y << "\">" << escape(name) << "</text>\n";
}

}  // namespace

std::string svg_convergence_chart(std::span<const NamedCurve> series, const std::string& title) {
  std::size_t len = 1;
  for (const auto& s : series) len = std::max(len, s.curve.mean.size());
  Frame f{static_cast<double>(len - 1), 0.0, 1.0};
  if (f.x_max == 0) f.x_max = 1;
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.curve.mean.size(); ++t) {
      f.y_min = std::min(f.y_min, s.curve.mean[t] - s.curve.sd[t]);
      f.y_max = std::max(f.y_max, s.curve.mean[t] + s.curve.sd[t]);
    }
  std::ostringstream os;
  open_svg(os, f, title, "iteration", "normalized objective", std::min<int>(10, static_cast<int>(f.x_max)));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& c = series[i].curve;
    if (c.mean.empty()) continue;
    os << "<polygon fill=\"" << color(i) << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      os << f.px(static_cast<double>(t)) << ',' << f.py(c.mean[t] + c.sd[t]) << ' ';
    for (std::size_t t = c.mean.size(); t-- > 0;)
      os << f.px(static_cast<double>(t)) << ',' << f.py(c.mean[t] - c.sd[t]) << ' ';
    os << "\"/>\n<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color(i) << "\" points=\"";
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      os << f.px(static_cast<double>(t)) << ',' << f.py(c.mean[t]) << ' ';
    os << "\"/>\n";
    legend(os, i, series[i].name);
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram_chart(std::span<const NamedHistogram> series, const std::string& title) {
  std::size_t len = 1;
  double top = 1;
  for (const auto& s : series) {
    len = std::max(len, s.histogram.mean_selected.size());
    for (double v : s.histogram.mean_selected) top = std::max(top, v);
  }
  Frame f{static_cast<double>(len), 0.0, std::ceil(top)};
  std::ostringstream os;
  open_svg(os, f, title, "iteration", "mean columns selected", std::min<int>(10, static_cast<int>(len)));
  const double slot = (f.px(1) - f.px(0)) / static_cast<double>(std::max<std::size_t>(1, series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& h = series[i].histogram.mean_selected;
    for (std::size_t t = 0; t < h.size(); ++t) {
      const double x = f.px(static_cast<double>(t)) + slot * static_cast<double>(i);
      const double y = f.py(h[t]);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << std::max(0.5, slot * 0.9)
         << "\" height=\"" << f.py(0) - y << "\" fill=\"" << color(i) << "\"/>\n";
    }
    legend(os, i, series[i].name);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ffcg
