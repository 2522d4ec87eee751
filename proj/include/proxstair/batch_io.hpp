#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "proxstair/prox.hpp"

namespace proxstair {

/// Parsed contents of a batch CSV with header
/// gamma,x,N,d_1,w_1,...,d_Nmax,w_Nmax
/// Padded slots carry weight 0. Original rows are kept verbatim so the
/// output file can append a y column without reformatting.
struct BatchCsv {
  ProxBatch batch;
  std::string header;
  std::vector<std::string> rows;
};

/// Throws Error(Format) with the offending 1-based row number in the message.
BatchCsv read_batch_csv(std::istream& in);

/// Writes the input rows with a trailing y column (17 significant digits).
void write_batch_csv(std::ostream& out, const BatchCsv& csv,
                     const std::vector<double>& y);

/// Round-trip-safe decimal formatting (17 significant digits).
std::string format_double(double v);

}  // namespace proxstair
