#pragma once

namespace iotguard {

// Exit codes: 0 ok, 1 usage, 2 config, 3 parse, 4 transport, 5 numeric.
int run_cli(int argc, const char* const* argv);

}  // namespace iotguard
