#pragma once

#include <functional>
#include <string>

namespace advhar {

using WarningSink = std::function<void(const std::string &)>;

/// Emits a non-fatal diagnostic. Defaults to stderr.
void warn(const std::string &message);

/// Replaces the warning sink and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace advhar
