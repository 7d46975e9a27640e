#pragma once

namespace rayfield::cli {

/// Exit codes: 0 pass, 1 tolerance or consistency failure, 2 usage or parse error.
int run(int argc, char** argv);

}  // namespace rayfield::cli
