#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "transient/accelerogram.hpp"

namespace transient {

/// Parses an accelerogram from text. Two layouts are accepted:
///   - two columns "t a" (whitespace or comma separated);
///   - one column "a" with a uniform step declared as "# dt=<value>".
/// Other '#' lines are comments. Times must be non-negative and strictly
/// increasing.
Accelerogram parse_accelerogram(std::string_view text, std::string source = {});

Accelerogram read_accelerogram(const std::filesystem::path& path);

/// Two-column text with the shortest decimal that round-trips each value.
std::string serialize_accelerogram(const Accelerogram& record);

/// Clips to [t_start, t_stop] (interpolating the end samples), shifts the
/// window to start at t = 0 and multiplies the values by `scale`.
Accelerogram window_and_scale(const Accelerogram& record, double t_start, double t_stop, double scale);

/// Bundled full-transient input: decaying sinusoids over 3 s, peak 0.3,
/// sampled every 0.01 s, with a cosine taper to zero over the last 0.5 s.
Accelerogram synthetic_record();

}  // namespace transient
