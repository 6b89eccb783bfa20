#ifndef COHERENCE_STATE_IO_HPP
#define COHERENCE_STATE_IO_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include "coherence/states.hpp"

namespace coherence {

using StateFile = std::variant<PureState, DensityMatrix>;

// State file format:
//   kind: pure | density
//   dim: n
// followed by n "re,im" pairs (pure) or n rows of n pairs (density),
// whitespace-separated. Parse errors carry the offending line number;
// states violating their invariants raise validation_error.
StateFile read_state(std::istream& in);
StateFile read_state_file(const std::string& path);

std::string format_state(const PureState& x);
std::string format_state(const DensityMatrix& rho);
void write_state_file(const std::string& path, const StateFile& state);

// Floating-point cell formatting shared by all CSV emitters: 12 significant
// digits, so identical configurations diff clean.
std::string csv_double(double v);

} // namespace coherence

#endif
