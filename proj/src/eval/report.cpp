#include <iomanip>
#include <sstream>

#include "dlr/common/error.hpp"
#include "dlr/eval/end_to_end.hpp"

namespace dlr::eval {

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string fmt(const std::optional<double>& v, int precision = 4) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json loc = nlohmann::json::object();
  for (const auto& m : localization) {
    const auto k = std::to_string(m.k);
    loc["mrr@" + k] = m.mrr;
    loc["map@" + k] = m.map;
    loc["fpr@" + k] = opt(m.fpr);
  }
  nlohmann::json patterns = nlohmann::json::object();
  for (const auto& [p, f1] : per_pattern) patterns[std::string(pattern_name(p))] = opt(f1);
  return {{"num_samples", num_samples},
          {"num_buggy", num_buggy},
          {"detection", {{"f1", detection.f1}, {"fpr", opt(detection.fpr)}}},
          {"localization", loc},
          {"repair", repair ? nlohmann::json{{"em", repair->em}, {"bleu", repair->bleu}} : nlohmann::json(nullptr)},
          {"end_to_end",
           {{"bl", opt(end_to_end.bl)},
            {"pr", opt(end_to_end.pr)},
            {"bl_metric", end_to_end.bl_metric},
            {"detected", end_to_end.detected},
            {"detected_buggy", end_to_end.detected_buggy},
            {"false_positives", end_to_end.false_positives},
            {"warnings", end_to_end.warnings}}},
          {"per_pattern", patterns}};
}

std::string MetricsReport::to_table() const {
  std::ostringstream os;
  os << "samples " << num_samples << " (buggy " << num_buggy << ")\n\n";
  os << "Detection      F1 " << fmt(detection.f1) << "   FPR " << fmt(detection.fpr) << "\n\n";
  if (!localization.empty()) {
    os << "Localization   " << std::setw(8) << "k" << std::setw(10) << "MRR" << std::setw(10) << "MAP" << std::setw(10)
       << "FPR" << '\n';
    for (const auto& m : localization) {
      os << "               " << std::setw(8) << m.k << std::setw(10) << fmt(m.mrr) << std::setw(10) << fmt(m.map)
         << std::setw(10) << fmt(m.fpr) << '\n';
    }
    os << '\n';
  }
  if (repair) os << "Repair         EM " << fmt(repair->em) << "   BLEU " << fmt(repair->bleu, 2) << "\n\n";
  os << "End-to-end     BL (" << end_to_end.bl_metric << ") " << fmt(end_to_end.bl) << "   PR (BLEU) "
     << fmt(end_to_end.pr, 2) << "   flagged " << end_to_end.detected << ", of which buggy "
     << end_to_end.detected_buggy << '\n';
  for (const auto& w : end_to_end.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string MetricsReport::per_pattern_csv() const {
  std::ostringstream os;
  os << "pattern,samples,f1\n";
  for (const auto& [p, f1] : per_pattern) {
    const auto it = pattern_counts.find(p);
    os << pattern_name(p) << ',' << (it == pattern_counts.end() ? 0 : it->second) << ','
       << (f1 ? fmt(f1, 6) : "") << '\n';
  }
  return os.str();
}

void check_monotonicity(const MetricsReport& report) {
  // With the min(k, #buggy) denominator, MAP@k can fall as k grows once a
  // sample has several buggy lines ([bug, ok, bug] gives 1 at k=1, 5/6 at
  // k=3), so MAP is only held to the rule when it coincides with MRR.
  const bool single_line = report.end_to_end.bl_metric != "map@5";
  for (std::size_t i = 0; i < report.localization.size(); ++i) {
    for (std::size_t j = 0; j < report.localization.size(); ++j) {
      const auto& a = report.localization[i];
      const auto& b = report.localization[j];
      if (a.k >= b.k) continue;
      const auto where = " decreases from k=" + std::to_string(a.k) + " to k=" + std::to_string(b.k);
      if (b.mrr < a.mrr) throw NumericError("MRR" + where);
      if (single_line && b.map < a.map) throw NumericError("MAP" + where);
      if (a.fpr && b.fpr && *b.fpr < *a.fpr) throw NumericError("FPR" + where);
    }
  }
}

}  // namespace dlr::eval
