#ifndef GPDISCRIM_IO_HPP
#define GPDISCRIM_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gpdiscrim/design_measures.hpp"
#include "gpdiscrim/gp.hpp"

namespace gpdiscrim {

// All floating-point output is printed with 17 significant digits so that
// values round-trip exactly.
std::string format_double(double v);

// Design CSV: header "x1,...,xd[,y]", one row per point.
void write_design_csv(std::ostream& os, const Design& design);
Design read_design_csv(std::istream& is, bool has_observations);

// Measure CSV: header "x1,...,xd,weight".
void write_measure_csv(std::ostream& os, const DesignMeasure& xi);
DesignMeasure read_measure_csv(std::istream& is);

// Generic numeric table with a caller-supplied header.
void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

// Kernel specs as "key = value" lines:
//   family = matern32
//   sigma2 = 1
//   theta = 1
// Unknown keys are rejected; parameters irrelevant to the family are
// optional.
std::string kernel_spec_to_text(const KernelSpec& spec);
KernelSpec kernel_spec_from_text(const std::string& text);

}  // namespace gpdiscrim

#endif
