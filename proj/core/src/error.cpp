#include "distill/error.hpp"

namespace distill {

int exit_code(ErrorKind kind) noexcept { return static_cast<int>(kind); }

}  // namespace distill
