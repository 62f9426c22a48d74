#ifndef GLYCAST_CSV_IO_HPP
#define GLYCAST_CSV_IO_HPP

#include <iosfwd>
#include <string>

#include "glycast/series.hpp"

namespace glycast {

/// Sample-file schema: `patient_id,timestamp,variable,value,unit` with
/// RFC 3339 UTC timestamps. Event series write one row per event, uniform
/// series one row per non-gap sample; import reconstructs uniform grids
/// (step inferred from the GCD of timestamp deltas) and re-inserts gaps at
/// missing slots. Values survive a round trip to 1e-9, timestamps exactly.

void write_patient_csv(const PatientRecord& record, std::ostream& out);
void write_patient_csv(const PatientRecord& record, const std::string& path);

/// Throws ParseError (with 1-based line number) on malformed rows, unknown
/// variable names, unit mismatches, or mixed patient ids.
PatientRecord read_patient_csv(std::istream& in, const std::string& name = "<stream>");
PatientRecord read_patient_csv(const std::string& path);

} // namespace glycast

#endif
