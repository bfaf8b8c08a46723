#include <iostream>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "lazybn/cli.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // big tables come and go; keep their pages instead of re-faulting them
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  std::vector<std::string> args(argv + 1, argv + argc);
  return lazybn::run_cli(args, std::cout, std::cerr);
}
