#pragma once

namespace sarc {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 external-service error.
int run_cli(int argc, const char* const* argv);

}  // namespace sarc
