#include "otplan/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

namespace otplan {

namespace {

// Fixed-precision coordinates keep the files small and stable.
std::string fmt(double v) {
  std::array<char, 32> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.4f", v);
  std::string s(buf.data(), static_cast<std::size_t>(n));
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

struct Rgb {
  double r, g, b;
};

Rgb lerp(Rgb a, Rgb b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

}  // namespace

std::string ramp_color(double t) {
  if (!(t >= 0.0)) t = std::isnan(t) ? 1.0 : 0.0;
  t = std::min(t, 1.0);
  constexpr Rgb lo{0x2c, 0x7b, 0xb6}, mid{0xff, 0xff, 0xbf}, hi{0xd7, 0x19, 0x1c};
  const Rgb c = t < 0.5 ? lerp(lo, mid, 2.0 * t) : lerp(mid, hi, 2.0 * t - 1.0);
  std::array<char, 8> buf{};
  std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
  return std::string(buf.data(), 7);
}

std::string snapshot_svg(const Configuration& config, const Shape& shape, const SnapshotStyle& style) {
  const double M = style.domain_M;
  const double px = 600.0;
  const double s = px / (2.0 * M);
  auto X = [&](double x) { return fmt((x + M) * s); };
  auto Y = [&](double y) { return fmt((M - y) * s); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  out += "<rect width=\"600\" height=\"600\" fill=\"white\" stroke=\"black\"/>\n";
  if (!style.title.empty())
    out += "<text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + escape(style.title) +
           "</text>\n";
  out += "<g id=\"shape\" fill=\"#b0b0b0\">\n";
  const double dot = std::max(0.75, 0.35 * shape.sampling_resolution() * s);
  for (const auto& p : shape.points())
    out += "<circle cx=\"" + X(p.x) + "\" cy=\"" + Y(p.y) + "\" r=\"" + fmt(dot) + "\"/>\n";
  out += "</g>\n<g id=\"robots\" stroke=\"black\" stroke-width=\"0.5\">\n";
  const double mu_max = style.mu_max > 0.0 ? style.mu_max : 1.0;
  for (const auto& x : config) {
    out += "<circle class=\"robot\" cx=\"" + X(x.x) + "\" cy=\"" + Y(x.y) + "\" r=\"" +
           fmt(std::max(2.0, style.robot_radius * s)) + "\" fill=\"" + ramp_color(shape.mu(x) / mu_max) +
           "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

EnergySeries energy_series(const std::string& label, const std::vector<RecordRow>& rows) {
  EnergySeries s{label, {}};
  for (const auto& r : rows)
    if (r.phase != Phase::VirtualDiffusion) s.points.emplace_back(r.iteration, r.psi);
  return s;
}

std::string energy_plot_svg(const std::vector<EnergySeries>& series, const std::string& title) {
  static const std::array<const char*, 4> colors = {"#d7191c", "#2c7bb6", "#1a9641", "#7b3294"};
  const double W = 720, H = 440, L = 70, R = 20, T = 30, B = 50;

  std::int64_t it_max = 1;
  double lo = kInfinity, hi = -kInfinity;
  for (const auto& s : series)
    for (const auto& [it, v] : s.points) {
      it_max = std::max(it_max, it);
      if (std::isfinite(v) && v > 0.0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  if (!(lo <= hi)) lo = 1e-3, hi = 1.0;
  double dlo = std::floor(std::log10(lo)), dhi = std::ceil(std::log10(hi));
  if (dhi <= dlo) dhi = dlo + 1.0;

  auto X = [&](double it) { return L + (W - L - R) * it / static_cast<double>(it_max); };
  auto Y = [&](double v) {
    const double lv = std::log10(std::clamp(v, std::pow(10.0, dlo), std::pow(10.0, dhi)));
    return T + (H - T - B) * (dhi - lv) / (dhi - dlo);
  };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" viewBox=\"0 0 720 440\">\n";
  out += "<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!title.empty())
    out += "<text x=\"" + fmt(L) + "\" y=\"18\" font-size=\"14\">" + escape(title) + "</text>\n";
  out += "<rect x=\"" + fmt(L) + "\" y=\"" + fmt(T) + "\" width=\"" + fmt(W - L - R) + "\" height=\"" +
         fmt(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = dlo; d <= dhi + 0.5; d += 1.0) {
    const double y = Y(std::pow(10.0, d));
    out += "<line x1=\"" + fmt(L) + "\" x2=\"" + fmt(W - R) + "\" y1=\"" + fmt(y) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">1e" +
           std::to_string(static_cast<int>(d)) + "</text>\n";
  }
  out += "<text x=\"" + fmt(L) + "\" y=\"" + fmt(H - 30) + "\">0</text>\n";
  out += "<text x=\"" + fmt(W - R) + "\" y=\"" + fmt(H - 30) + "\" text-anchor=\"end\">" +
         std::to_string(it_max) + "</text>\n";
  out += "<text x=\"" + fmt((L + W - R) / 2) + "\" y=\"" + fmt(H - 12) +
         "\" text-anchor=\"middle\">iteration</text>\n";
  out += "<text x=\"16\" y=\"" + fmt((T + H - B) / 2) + "\" transform=\"rotate(-90 16 " +
         fmt((T + H - B) / 2) + ")\" text-anchor=\"middle\">objective</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % colors.size()];
    const std::size_t stride = std::max<std::size_t>(1, s.points.size() / 2000);
    out += "<polyline class=\"series\" data-label=\"" + escape(s.label) + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i % stride != 0 && i + 1 != s.points.size()) continue;
      const auto& [it, v] = s.points[i];
      out += fmt(X(static_cast<double>(it))) + "," + fmt(Y(v)) + " ";
    }
    out += "\"/>\n";
    const double ly = T + 16 + 16 * static_cast<double>(k);
    out += "<line x1=\"" + fmt(W - R - 130) + "\" x2=\"" + fmt(W - R - 110) + "\" y1=\"" + fmt(ly - 4) +
           "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text class=\"legend\" x=\"" + fmt(W - R - 104) + "\" y=\"" + fmt(ly) + "\">" + escape(s.label) +
           "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

PlotReport render_snapshots(const TrajectoryFile& trajectory, const Shape& shape,
                            const std::vector<std::int64_t>& iterations,
                            const std::filesystem::path& out_dir, const std::string& stem,
                            SnapshotStyle style) {
  PlotReport report;
  const auto recorded = trajectory.iterations();
  std::vector<std::int64_t> wanted = iterations;
  if (wanted.empty() && !recorded.empty()) {
    wanted.push_back(recorded.front());
    if (recorded.back() != recorded.front()) wanted.push_back(recorded.back());
  }
  const std::set<std::int64_t> have(recorded.begin(), recorded.end());
  const std::string base_title = style.title;
  for (auto it : wanted) {
    if (!have.count(it)) {
      report.missing.push_back(it);
      continue;
    }
    style.title = (base_title.empty() ? stem : base_title) + "  iteration " + std::to_string(it) + " (" +
                  to_string(trajectory.phase_at(it)) + ")";
    const auto path = out_dir / (stem + "_it" + std::to_string(it) + ".svg");
    write_text_file(path, snapshot_svg(trajectory.configuration_at(it), shape, style));
    report.written.push_back(path);
  }
  return report;
}

}  // namespace otplan
