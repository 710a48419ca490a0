#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fmgls/model.hpp"

namespace fmgls::cli {

// Wide panel: a `t` column, then y_<name> and x_<name> for every unit.
// Ingested data has no observation before the first row, so x0 is set to
// the first level and the first difference of x is zero.
struct Dataset {
  std::vector<std::string> names;
  std::vector<long long> t;
  PanelData data;

  int index_of(const std::string& name) const;
};

Dataset parse_dataset(std::istream& in, const std::string& source);
Dataset read_dataset(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& ds);

// Splits one RFC-4180 record. `in` is positioned at the start of a record;
// returns false at end of input. Quoted fields may span lines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, int& line);

std::string csv_escape(const std::string& field);
// %.17g, enough to round-trip any double.
std::string format_number(double v);

}  // namespace fmgls::cli
