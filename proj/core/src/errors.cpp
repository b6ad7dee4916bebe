#include "swtex/errors.hpp"

namespace swtex {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }

}  // namespace swtex
