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

// Estimate emissions for labelled companies and audit a published table.
// Usage: emission_estimate DATA_DIR

#include <fstream>
#include <iostream>
#include <map>

#include "hsc/hsc.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: emission_estimate DATA_DIR\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];

  std::ifstream tax_in(dir / "taxonomy.jsonl");
  const auto tax = hsc::parse_taxonomy(tax_in);
  std::ifstream ent_in(dir / "case_enterprises.jsonl");
  const auto companies = hsc::load_enterprises(ent_in);
  std::ifstream int_in(dir / "intensities.csv");
  const auto table = hsc::load_intensities(int_in);

  // Use each company's label as its code; a classifier would supply these.
  std::map<std::string, std::string> codes;
  for (const auto& c : companies) codes[c.id] = c.naics_codes.front();

  const auto report = hsc::build_emission_report(companies, codes, table, &tax);
  std::cout << hsc::emission_report_csv(report);
  std::cout << "MAPE " << hsc::io::format_fixed(*report.mape, 2) << "%\n";

  std::ifstream case_in(dir / "case_study.csv");
  const auto audit = hsc::audit_case_table(hsc::load_case_table(case_in), 45.88);
  std::cout << "published table: column mean "
            << hsc::io::format_fixed(audit.mean_printed_ape, 2)
            << ", stated 45.88"
            << (audit.stated_mape_diverges ? " (does not match)" : "") << '\n';
  return 0;
}
