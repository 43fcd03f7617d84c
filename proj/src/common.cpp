#include <omp.h>

#include "hrqsum/backend.hpp"
#include "hrqsum/error.hpp"

namespace hrqsum {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
      return "parse_error";
    case ErrorKind::kFormat:
      return "format_error";
    case ErrorKind::kTruncated:
      return "truncated";
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kNotFound:
      return "not_found";
    case ErrorKind::kIo:
      return "io_error";
  }
  return "error";
}

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace hrqsum
