// Copyright 2026 The HSC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Emission estimates: revenue (billion USD) times sector carbon intensity
// (MtCO2e per billion USD, equivalently tCO2e per thousand USD) gives
// MtCO2e. Accuracy against self-reported figures is measured with MAPE.

#pragma once

#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsc/corpus.hpp"
#include "hsc/error.hpp"
#include "hsc/io.hpp"
#include "hsc/taxonomy.hpp"

namespace hsc {

namespace detail {

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Maps header names to column positions and checks required ones.
class CsvHeader {
 public:
  CsvHeader(std::string_view line, std::string what) : what_(std::move(what)) {
    const auto names = io::split_csv_line(line);
    for (std::size_t i = 0; i < names.size(); ++i) columns_[names[i]] = i;
  }

  std::size_t require(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) {
      throw ValidationError(what_ + ": header lacks column '" + name + "'");
    }
    return it->second;
  }

  std::optional<std::size_t> optional(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t width() const noexcept { return columns_.size(); }

 private:
  std::map<std::string, std::size_t> columns_;
  std::string what_;
};

}  // namespace detail

struct IntensityKey {
  std::string code;
  std::string region;
  auto operator<=>(const IntensityKey&) const = default;
};

struct IntensityMatch {
  std::string matched_code;
  double intensity = 0.0;
  int fallback_level = 0;  // ancestor steps taken; 0 = exact code
};

class IntensityTable {
 public:
  void add(std::string code, double intensity, std::string region = {}) {
    if (!std::isfinite(intensity) || intensity < 0.0) {
      throw ValidationError("intensity for '" + code +
                            "' must be finite and >= 0");
    }
    IntensityKey key{code, std::move(region)};
    if (!entries_.emplace(key, intensity).second) {
      throw ValidationError("duplicate intensity row for code '" + code + "'" +
                            (key.region.empty() ? "" : " region '" + key.region + "'"));
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }

  std::optional<double> find(const std::string& code,
                             const std::string& region = {}) const {
    auto it = entries_.find({code, region});
    if (it == entries_.end() && !region.empty()) it = entries_.find({code, {}});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Exact code first, then its ancestors nearest-first. Ancestors come from
  /// the taxonomy when it knows the code, otherwise from shorter prefixes.
  std::optional<IntensityMatch> lookup(const std::string& code,
                                       const Taxonomy* tax = nullptr,
                                       const std::string& region = {}) const {
    std::vector<std::string> chain;
    if (tax != nullptr && tax->contains(code)) {
      chain = tax->path_to_root(code);
    } else {
      for (std::size_t len = code.size(); len > 0; --len) {
        chain.push_back(code.substr(0, len));
      }
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (const auto v = find(chain[i], region)) {
        return IntensityMatch{chain[i], *v, static_cast<int>(i)};
      }
    }
    return std::nullopt;
  }

 private:
  std::map<IntensityKey, double> entries_;
};

/// CSV with header `code,intensity[,region]` (any column order).
inline IntensityTable load_intensities(std::istream& in) {
  IntensityTable table;
  std::optional<detail::CsvHeader> header;
  std::size_t code_col = 0, value_col = 0;
  std::optional<std::size_t> region_col;
  io::for_each_record_line(in, [&](std::string_view line, std::size_t number) {
    if (!header) {
      header.emplace(line, "intensity table");
      code_col = header->require("code");
      value_col = header->require("intensity");
      region_col = header->optional("region");
      return;
    }
    const auto where = "intensity table line " + std::to_string(number);
    const auto fields = io::split_csv_line(line);
    if (fields.size() <= std::max(code_col, value_col)) {
      throw ValidationError(where + ": too few columns");
    }
    const auto value = detail::parse_number(fields[value_col]);
    if (!value) {
      throw ValidationError(where + ": non-numeric intensity '" +
                            fields[value_col] + "'");
    }
    if (fields[code_col].empty()) throw ValidationError(where + ": empty code");
    std::string region;
    if (region_col && *region_col < fields.size()) region = fields[*region_col];
    try {
      table.add(fields[code_col], *value, std::move(region));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  });
  if (table.size() == 0) throw ValidationError("intensity table is empty");
  return table;
}

/// MtCO2e = billion USD * MtCO2e per billion USD.
inline double estimate(double revenue_busd, double intensity) {
  if (!std::isfinite(revenue_busd) || !std::isfinite(intensity) ||
      revenue_busd < 0.0 || intensity < 0.0) {
    throw PreconditionError("estimate: revenue and intensity must be finite "
                            "and >= 0");
  }
  return revenue_busd * intensity;
}

/// |R - E| / R in percent.
inline double absolute_percentage_error(double reported, double estimated) {
  if (!(reported > 0.0)) {
    throw PreconditionError("APE needs reported emissions > 0");
  }
  return 100.0 * std::abs((reported - estimated) / reported);
}

struct ReportedEstimated {
  double reported = 0.0;
  double estimated = 0.0;
};

inline double mape(std::span<const ReportedEstimated> pairs) {
  if (pairs.empty()) throw PreconditionError("mape: empty list");
  double sum = 0.0;
  for (const auto& p : pairs) {
    sum += absolute_percentage_error(p.reported, p.estimated);
  }
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Pipeline report

struct EmissionRecord {
  std::string id;
  double revenue_busd = 0.0;
  std::string code;  // classified code
  double intensity = 0.0;
  double estimated_mt = 0.0;
  std::optional<double> reported_mt;
  std::optional<double> ape;
  int fallback_level = 0;
};

struct EmissionReport {
  std::vector<EmissionRecord> records;
  std::optional<double> mape;  // over records with reported_mt > 0
  std::size_t fallbacks = 0;
  std::vector<ItemError> skipped;  // no revenue, no code, or no intensity
};

/// Joins each enterprise's classified code to the intensity table.
/// `codes` maps enterprise id to its top-1 code.
inline EmissionReport build_emission_report(
    std::span<const EnterpriseRecord> enterprises,
    const std::map<std::string, std::string>& codes,
    const IntensityTable& table, const Taxonomy* tax = nullptr) {
  EmissionReport report;
  std::vector<ReportedEstimated> pairs;
  for (const auto& e : enterprises) {
    const auto code = codes.find(e.id);
    if (code == codes.end()) {
      report.skipped.push_back({e.id, "no classified code"});
      continue;
    }
    if (!e.revenue_busd) {
      report.skipped.push_back({e.id, "no revenue"});
      continue;
    }
    const auto match = table.lookup(code->second, tax);
    if (!match) {
      report.skipped.push_back(
          {e.id, "no intensity for '" + code->second + "' or its ancestors"});
      continue;
    }
    EmissionRecord r;
    r.id = e.id;
    r.revenue_busd = *e.revenue_busd;
    r.code = code->second;
    r.intensity = match->intensity;
    r.estimated_mt = estimate(r.revenue_busd, r.intensity);
    r.fallback_level = match->fallback_level;
    if (match->fallback_level > 0) ++report.fallbacks;
    if (e.reported_emissions_mt && *e.reported_emissions_mt > 0.0) {
      r.reported_mt = e.reported_emissions_mt;
      r.ape = absolute_percentage_error(*r.reported_mt, r.estimated_mt);
      pairs.push_back({*r.reported_mt, r.estimated_mt});
    }
    report.records.push_back(std::move(r));
  }
  if (!pairs.empty()) report.mape = mape(pairs);
  return report;
}

inline std::string emission_report_csv(const EmissionReport& report) {
  std::string out =
      "id,revenue_busd,code,intensity,estimated_mt,reported_mt,ape,"
      "fallback_level\n";
  for (const auto& r : report.records) {
    out += r.id + ',' + io::format_double(r.revenue_busd) + ',' + r.code + ',' +
           io::format_double(r.intensity) + ',' +
           io::format_double(r.estimated_mt) + ',' +
           (r.reported_mt ? io::format_double(*r.reported_mt) : "") + ',' +
           (r.ape ? io::format_double(*r.ape) : "") + ',' +
           std::to_string(r.fallback_level) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Case-study audit: checks a published table of estimates for internal
// consistency. Columns: company,revenue_busd,intensity,estimated_mt,
// reported_mt,ape[,error_type].

struct CaseRow {
  std::string company;
  double revenue_busd = 0.0;
  double intensity = 0.0;
  double estimated_mt = 0.0;  // as printed
  double reported_mt = 0.0;
  double printed_ape = 0.0;
  std::string error_type;  // annotation only
};

inline std::vector<CaseRow> load_case_table(std::istream& in) {
  std::vector<CaseRow> rows;
  std::optional<detail::CsvHeader> header;
  std::size_t c_company = 0, c_rev = 0, c_int = 0, c_est = 0, c_rep = 0,
              c_ape = 0;
  std::optional<std::size_t> c_type;
  io::for_each_record_line(in, [&](std::string_view line, std::size_t number) {
    if (!header) {
      header.emplace(line, "case table");
      c_company = header->require("company");
      c_rev = header->require("revenue_busd");
      c_int = header->require("intensity");
      c_est = header->require("estimated_mt");
      c_rep = header->require("reported_mt");
      c_ape = header->require("ape");
      c_type = header->optional("error_type");
      return;
    }
    const auto where = "case table line " + std::to_string(number);
    const auto f = io::split_csv_line(line);
    auto num = [&](std::size_t col, const char* name) {
      const auto v = col < f.size() ? detail::parse_number(f[col]) : std::nullopt;
      if (!v) throw ValidationError(where + ": bad " + name);
      return *v;
    };
    CaseRow r;
    r.company = c_company < f.size() ? f[c_company] : "";
    r.revenue_busd = num(c_rev, "revenue_busd");
    r.intensity = num(c_int, "intensity");
    r.estimated_mt = num(c_est, "estimated_mt");
    r.reported_mt = num(c_rep, "reported_mt");
    r.printed_ape = num(c_ape, "ape");
    if (c_type && *c_type < f.size()) r.error_type = f[*c_type];
    if (!(r.reported_mt > 0.0)) {
      throw ValidationError(where + ": reported_mt must be > 0");
    }
    rows.push_back(std::move(r));
  });
  if (rows.empty()) throw ValidationError("case table has no rows");
  return rows;
}

struct CaseAuditRow {
  CaseRow row;
  double product_mt = 0.0;         // revenue * intensity
  double ape_from_estimate = 0.0;  // printed estimate vs reported
  double ape_from_product = 0.0;   // recomputed estimate vs reported
};

struct CaseAudit {
  std::vector<CaseAuditRow> rows;
  double mean_printed_ape = 0.0;
  double mape_from_estimates = 0.0;
  double mape_from_products = 0.0;
  std::optional<double> stated_mape;
  /// |mean_printed_ape - stated_mape| > tolerance.
  bool stated_mape_diverges = false;
};

inline CaseAudit audit_case_table(std::span<const CaseRow> rows,
                                  std::optional<double> stated_mape = {},
                                  double tolerance = 0.01) {
  if (rows.empty()) throw PreconditionError("audit: no rows");
  CaseAudit audit;
  audit.stated_mape = stated_mape;
  std::vector<ReportedEstimated> printed, recomputed;
  double column_sum = 0.0;
  for (const auto& r : rows) {
    CaseAuditRow a;
    a.row = r;
    a.product_mt = estimate(r.revenue_busd, r.intensity);
    a.ape_from_estimate = absolute_percentage_error(r.reported_mt, r.estimated_mt);
    a.ape_from_product = absolute_percentage_error(r.reported_mt, a.product_mt);
    printed.push_back({r.reported_mt, r.estimated_mt});
    recomputed.push_back({r.reported_mt, a.product_mt});
    column_sum += r.printed_ape;
    audit.rows.push_back(std::move(a));
  }
  audit.mean_printed_ape = column_sum / static_cast<double>(rows.size());
  audit.mape_from_estimates = mape(printed);
  audit.mape_from_products = mape(recomputed);
  if (stated_mape) {
    audit.stated_mape_diverges =
        std::abs(audit.mean_printed_ape - *stated_mape) > tolerance;
  }
  return audit;
}

inline std::string case_audit_csv(const CaseAudit& audit) {
  std::string out =
      "company,revenue_busd,intensity,estimated_mt,reported_mt,printed_ape,"
      "product_mt,ape_from_estimate,ape_from_product,error_type\n";
  for (const auto& a : audit.rows) {
    const auto& r = a.row;
    out += r.company + ',' + io::format_double(r.revenue_busd) + ',' +
           io::format_double(r.intensity) + ',' +
           io::format_double(r.estimated_mt) + ',' +
           io::format_double(r.reported_mt) + ',' +
           io::format_double(r.printed_ape) + ',' +
           io::format_fixed(a.product_mt, 4) + ',' +
           io::format_fixed(a.ape_from_estimate, 4) + ',' +
           io::format_fixed(a.ape_from_product, 4) + ',' + r.error_type + '\n';
  }
  return out;
}

}  // namespace hsc
