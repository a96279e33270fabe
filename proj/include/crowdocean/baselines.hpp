#pragma once

// Literature baseline handling: load per-country Big Five reference values,
// compute percentual differences against computed country scores, and emit
// a JSON report plus a plot-ready CSV series. The reference error levels
// published for this method (30% against Big Five literature values, 53%
// against Hofstede dimensions) ship as constants so reports can cite them.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdocean/core.hpp"
#include "crowdocean/ocean.hpp"
#include "crowdocean/trajectory_io.hpp"

namespace crowdocean {

inline constexpr double kReferenceOceanMeanErrorPct = 30.0;
inline constexpr double kReferenceHofstedeMeanErrorPct = 53.0;

struct LiteratureBaseline {
  std::string country;
  double o = 0.0;
  double c = 0.0;
  double e = 0.0;
  double a = 0.0;
  double n = 0.0;
  std::string source;

  [[nodiscard]] double dimension(int idx) const {
    switch (idx) {
      case 0: return o;
      case 1: return c;
      case 2: return e;
      case 3: return a;
      case 4: return n;
      default: throw UsageError("dimension index must be 0..4");
    }
  }
};

using BaselineSet = std::map<std::string, LiteratureBaseline>;

inline constexpr const char* kBaselinesCsvHeader = "country,O,C,E,A,N";

inline BaselineSet load_baselines(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("baseline file is empty");
  auto fields = detail::split_csv_line(line);
  const bool has_source = fields.size() == 7 && fields[6] == "source";
  if (!(fields.size() == 6 || has_source) || fields[0] != "country" || fields[1] != "O" ||
      fields[2] != "C" || fields[3] != "E" || fields[4] != "A" || fields[5] != "N") {
    throw ParseError(fmt::format("baseline header must be '{}' (optional trailing ',source')",
                                 kBaselinesCsvHeader));
  }
  const std::size_t expected = has_source ? 7 : 6;

  BaselineSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    fields = detail::split_csv_line(line);
    if (fields.size() != expected) {
      throw ParseError(
          fmt::format("baseline line {}: expected {} fields, got {}", line_no, expected,
                      fields.size()));
    }
    LiteratureBaseline b;
    std::string country(detail::trim(fields[0]));
    if (country.size() != 2 || !std::isalpha(static_cast<unsigned char>(country[0])) ||
        !std::isalpha(static_cast<unsigned char>(country[1]))) {
      throw ValidationError(
          fmt::format("baseline line {}: country '{}' is not an ISO 3166 alpha-2 code", line_no,
                      country));
    }
    b.country = {static_cast<char>(std::toupper(static_cast<unsigned char>(country[0]))),
                 static_cast<char>(std::toupper(static_cast<unsigned char>(country[1])))};
    double* dims[] = {&b.o, &b.c, &b.e, &b.a, &b.n};
    for (std::size_t i = 0; i < 5; ++i) {
      *dims[i] = detail::parse_number<double>(detail::trim(fields[i + 1]), line_no,
                                              kDimensionNames[i]);
      if (*dims[i] < 0.0 || *dims[i] > 1.0) {
        throw ValidationError(fmt::format("baseline line {}: {} value {} outside [0,1]", line_no,
                                          kDimensionNames[i], *dims[i]));
      }
    }
    if (has_source) b.source = std::string(detail::trim(fields[6]));
    if (!set.emplace(b.country, b).second) {
      throw ValidationError(fmt::format("baseline line {}: duplicate country '{}'", line_no,
                                        b.country));
    }
  }
  return set;
}

inline BaselineSet load_baselines_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open baseline file '{}'", path.string()));
  return load_baselines(in);
}

// --- percentual error -----------------------------------------------------------

// 100 * |computed - baseline| / baseline; a zero baseline leaves the error
// undefined and excluded from every mean.
inline std::optional<double> percentual_error(double computed, double baseline) {
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * std::abs(computed - baseline) / baseline;
}

struct DimensionErrors {
  std::array<std::optional<double>, 5> pct{};

  [[nodiscard]] std::optional<double> mean() const {
    double sum = 0.0;
    int defined = 0;
    for (const auto& v : pct) {
      if (v) {
        sum += *v;
        ++defined;
      }
    }
    if (defined == 0) return std::nullopt;
    return sum / defined;
  }
};

inline DimensionErrors percentual_error(const ScoreRow& computed,
                                        const LiteratureBaseline& baseline) {
  if (computed.country != baseline.country) {
    throw UsageError(fmt::format("score country '{}' does not match baseline country '{}'",
                                 computed.country, baseline.country));
  }
  DimensionErrors e;
  for (int d = 0; d < 5; ++d) {
    e.pct[static_cast<std::size_t>(d)] =
        percentual_error(computed.score.dimension(d), baseline.dimension(d));
  }
  return e;
}

// --- report ---------------------------------------------------------------------

struct CountryComparison {
  std::string country;
  OceanScore computed;
  LiteratureBaseline baseline;
  DimensionErrors errors;
};

struct ErrorReport {
  std::vector<CountryComparison> compared;      // sorted by country code
  std::vector<std::string> without_baseline;    // countries scored but not in the baseline file
  std::optional<double> overall_mean_pct;       // mean of all defined per-dimension errors
};

inline ErrorReport build_error_report(std::span<const ScoreRow> country_rows,
                                      const BaselineSet& baselines) {
  ErrorReport report;
  std::vector<const ScoreRow*> sorted;
  for (const ScoreRow& r : country_rows) {
    if (r.level != ScoreLevel::country) {
      throw UsageError("error report expects country-level rows");
    }
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreRow* a, const ScoreRow* b) { return a->country < b->country; });

  double sum = 0.0;
  int defined = 0;
  for (const ScoreRow* row : sorted) {
    const auto it = baselines.find(row->country);
    if (it == baselines.end()) {
      report.without_baseline.push_back(row->country);
      continue;
    }
    CountryComparison cmp;
    cmp.country = row->country;
    cmp.computed = row->score;
    cmp.baseline = it->second;
    cmp.errors = percentual_error(*row, it->second);
    for (const auto& v : cmp.errors.pct) {
      if (v) {
        sum += *v;
        ++defined;
      }
    }
    report.compared.push_back(std::move(cmp));
  }
  if (defined > 0) report.overall_mean_pct = sum / defined;
  return report;
}

// --- extremes -------------------------------------------------------------------

struct DimensionExtreme {
  std::string higher_country;
  double higher_value = 0.0;
  std::string lower_country;
  double lower_value = 0.0;
};

// Highest and lowest country per dimension; ties go to the ascending
// country code, and a lone country holds both ends.
inline std::array<DimensionExtreme, 5> extremes_table(std::span<const ScoreRow> country_rows) {
  if (country_rows.empty()) {
    throw InsufficientDataError("extremes table needs at least one country");
  }
  std::vector<const ScoreRow*> sorted;
  for (const ScoreRow& r : country_rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreRow* a, const ScoreRow* b) { return a->country < b->country; });

  std::array<DimensionExtreme, 5> out;
  for (int d = 0; d < 5; ++d) {
    DimensionExtreme& ex = out[static_cast<std::size_t>(d)];
    ex.higher_country = sorted.front()->country;
    ex.higher_value = sorted.front()->score.dimension(d);
    ex.lower_country = ex.higher_country;
    ex.lower_value = ex.higher_value;
    for (const ScoreRow* row : sorted) {
      const double v = row->score.dimension(d);
      if (v > ex.higher_value) {
        ex.higher_value = v;
        ex.higher_country = row->country;
      }
      if (v < ex.lower_value) {
        ex.lower_value = v;
        ex.lower_country = row->country;
      }
    }
  }
  return out;
}

// --- emission -------------------------------------------------------------------

struct ReportArtifacts {
  std::string report_json;
  std::string plot_series_csv;
};

inline constexpr const char* kPlotSeriesCsvHeader = "series,label,value";

inline ReportArtifacts emit_report(const ErrorReport& report,
                                   std::span<const ScoreRow> country_rows) {
  if (country_rows.empty()) {
    throw InsufficientDataError("report emission needs at least one country score");
  }
  nlohmann::json j;
  j["reference"] = {{"ocean_mean_error_pct", kReferenceOceanMeanErrorPct},
                    {"hofstede_mean_error_pct", kReferenceHofstedeMeanErrorPct}};
  j["countries"] = nlohmann::json::array();
  for (const CountryComparison& cmp : report.compared) {
    nlohmann::json entry;
    entry["country"] = cmp.country;
    for (int d = 0; d < 5; ++d) {
      const char* name = kDimensionNames[static_cast<std::size_t>(d)];
      entry["computed"][name] = cmp.computed.dimension(d);
      entry["baseline"][name] = cmp.baseline.dimension(d);
      const auto& err = cmp.errors.pct[static_cast<std::size_t>(d)];
      entry["error_pct"][name] = err ? nlohmann::json(*err) : nlohmann::json(nullptr);
    }
    const auto mean = cmp.errors.mean();
    entry["mean_error_pct"] = mean ? nlohmann::json(*mean) : nlohmann::json(nullptr);
    j["countries"].push_back(std::move(entry));
  }
  j["countries_without_baseline"] = report.without_baseline;
  j["overall_mean_error_pct"] =
      report.overall_mean_pct ? nlohmann::json(*report.overall_mean_pct) : nlohmann::json(nullptr);

  const auto extremes = extremes_table(country_rows);
  for (int d = 0; d < 5; ++d) {
    const DimensionExtreme& ex = extremes[static_cast<std::size_t>(d)];
    const char* name = kDimensionNames[static_cast<std::size_t>(d)];
    j["extremes"][name] = {{"higher_country", ex.higher_country},
                           {"higher_value", ex.higher_value},
                           {"lower_country", ex.lower_country},
                           {"lower_value", ex.lower_value}};
  }

  std::string csv = std::string(kPlotSeriesCsvHeader) + "\n";
  std::vector<const ScoreRow*> sorted;
  for (const ScoreRow& r : country_rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreRow* a, const ScoreRow* b) { return a->country < b->country; });
  for (int d = 0; d < 5; ++d) {
    const char* name = kDimensionNames[static_cast<std::size_t>(d)];
    for (const ScoreRow* row : sorted) {
      csv += fmt::format("computed_{},{},{:.6f}\n", name, row->country, row->score.dimension(d));
    }
  }
  for (const CountryComparison& cmp : report.compared) {
    for (int d = 0; d < 5; ++d) {
      const char* name = kDimensionNames[static_cast<std::size_t>(d)];
      csv += fmt::format("baseline_{},{},{:.6f}\n", name, cmp.country, cmp.baseline.dimension(d));
    }
  }
  for (const CountryComparison& cmp : report.compared) {
    for (int d = 0; d < 5; ++d) {
      const auto& err = cmp.errors.pct[static_cast<std::size_t>(d)];
      if (!err) continue;
      csv += fmt::format("error_pct_{},{},{:.6f}\n",
                         kDimensionNames[static_cast<std::size_t>(d)], cmp.country, *err);
    }
  }
  if (report.overall_mean_pct) {
    csv += fmt::format("mean_error_pct,overall,{:.6f}\n", *report.overall_mean_pct);
  }

  ReportArtifacts artifacts;
  artifacts.report_json = j.dump(2) + "\n";
  artifacts.plot_series_csv = std::move(csv);
  return artifacts;
}

}  // namespace crowdocean
