#include "cotrack/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace cotrack {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

// index of the step-resolution sample closest to t
size_t step_index(const std::vector<double>& step_times, double t) {
  const auto it = std::lower_bound(step_times.begin(), step_times.end(), t);
  if (it == step_times.end()) return step_times.size() - 1;
  if (it == step_times.begin()) return 0;
  const size_t hi = it - step_times.begin();
  return (t - step_times[hi - 1] < step_times[hi] - t) ? hi - 1 : hi;
}

}  // namespace

std::string config_hash(const std::string& canonical_dump) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void emit_csv(const SimResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_csv: cannot open " + path);

  const size_t n_eta = result.err_eta.size();
  const size_t n_track = result.err_track.size();
  const size_t n_vn = result.v_node.size();
  const bool have_v = !result.v_series.empty();

  out << "t";
  for (size_t i = 0; i < n_eta; ++i) out << ",err_eta_" << i + 1;
  for (size_t i = 0; i < result.err_omega.size(); ++i)
    out << ",err_omega_" << i + 1;
  for (size_t i = 0; i < result.err_e.size(); ++i) out << ",err_E_" << i + 1;
  for (size_t i = 0; i < n_track; ++i) out << ",err_track_" << i + 1;
  if (have_v) out << ",V";
  for (size_t i = 0; i < n_vn; ++i) out << ",V_" << i + 1;
  for (const auto& [name, series] : result.extra_series) out << "," << name;
  out << "\n";

  for (size_t k = 0; k < result.times.size(); ++k) {
    out << fmt(result.times[k]);
    for (const auto& s : result.err_eta) out << "," << fmt(s[k]);
    for (const auto& s : result.err_omega) out << "," << fmt(s[k]);
    for (const auto& s : result.err_e) out << "," << fmt(s[k]);
    for (const auto& s : result.err_track) out << "," << fmt(s[k]);
    if (have_v || n_vn > 0) {
      const size_t j = step_index(result.step_times, result.times[k]);
      if (have_v) out << "," << fmt(result.v_series[j]);
      for (const auto& s : result.v_node) out << "," << fmt(s[j]);
    }
    for (const auto& [name, series] : result.extra_series)
      out << "," << fmt(k < series.size() ? series[k] : 0.0);
    out << "\n";
  }
  if (!out) throw IoError("emit_csv: write failed for " + path);
}

namespace {

constexpr int kWidth = 720, kHeight = 420, kMargin = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void svg_plot(const std::string& path, const std::string& title,
              const std::vector<double>& t,
              const std::vector<std::vector<double>>& series, bool log_scale) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_plots: cannot open " + path);

  double t0 = 0, t1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (const auto& s : series) {
    for (size_t k = 0; k < s.size() && k < t.size(); ++k) {
      const double y = log_scale ? (s[k] > 0 ? std::log10(s[k]) : NAN) : s[k];
      if (std::isnan(y)) continue;
      if (!any) {
        t0 = t1 = t[k];
        y0 = y1 = y;
        any = true;
      }
      t0 = std::min(t0, t[k]);
      t1 = std::max(t1, t[k]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (t1 - t0 < 1e-12) t1 = t0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;

  const auto px = [&](double tv) {
    return kMargin + (tv - t0) / (t1 - t0) * (kWidth - 2 * kMargin);
  };
  const auto py = [&](double yv) {
    return kHeight - kMargin - (yv - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << (log_scale ? " (log10)" : "") << "</text>\n";

  // axes and ticks
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
      << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double tv = t0 + (t1 - t0) * k / 5.0;
    const double yv = y0 + (y1 - y0) * k / 5.0;
    out << "<text x=\"" << px(tv) << "\" y=\"" << kHeight - kMargin + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << std::setprecision(4) << tv << "</text>\n"
        << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << std::setprecision(4) << yv << "</text>\n";
  }

  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    std::ostringstream pts;
    bool pen_down = false;
    for (size_t k = 0; k < s.size() && k < t.size(); ++k) {
      const double y = log_scale ? (s[k] > 0 ? std::log10(s[k]) : NAN) : s[k];
      if (std::isnan(y)) {
        pen_down = false;
        continue;
      }
      pts << (pen_down ? " L" : " M") << px(t[k]) << " " << py(y);
      pen_down = true;
    }
    const std::string d = pts.str();
    if (!d.empty())
      out << "<path d=\"" << d << "\" fill=\"none\" stroke=\""
          << kPalette[i % 8] << "\" stroke-width=\"1.3\"/>\n";
    out << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\""
        << kMargin + 16 * (i + 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << kPalette[i % 8] << "\">i=" << i + 1 << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("emit_plots: write failed for " + path);
}

}  // namespace

std::vector<std::string> emit_plots(const SimResult& result,
                                    const std::string& path_prefix) {
  std::vector<std::string> files;
  const auto emit = [&](const std::string& stem, const std::string& title,
                        const std::vector<std::vector<double>>& series,
                        bool log_scale) {
    const std::string path = path_prefix + stem + ".svg";
    svg_plot(path, title, result.times, series, log_scale);
    files.push_back(path);
  };
  emit("err_eta", "leader state estimation error |eta_i - v|", result.err_eta,
       false);
  emit("err_omega", "frequency estimation error |omega_i - omega|",
       result.err_omega, false);
  emit("err_E", "output-matrix estimation error |E_i - E|", result.err_e, false);
  if (!result.err_track.empty())
    emit("err_track", "tracking error |q_i - y|", result.err_track, false);
  emit("err_eta_log", "leader state estimation error |eta_i - v|",
       result.err_eta, true);
  return files;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["scenario"] = manifest.scenario;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["outputs"] = manifest.outputs;
  std::ofstream out(path);
  if (!out) throw IoError("write_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write_manifest: write failed for " + path);
}

}  // namespace cotrack
