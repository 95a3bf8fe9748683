#pragma once

namespace pmd {

/// Entry point of the `pmd` tool. Returns 0 on success, 1 on a runtime or
/// pipeline error, 2 on a usage error.
int run_cli(int argc, char** argv);

}  // namespace pmd
