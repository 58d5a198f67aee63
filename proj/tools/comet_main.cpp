// Command-line frontend. Subcommands are registered in cli.hpp; this file
// only owns main() and top-level error reporting.

#include <exception>
#include <iostream>

#include "comet/cli.hpp"
#include "comet/token.hpp"

int main(int argc, char** argv) {
  try {
    return comet::cli::run(argc, argv);
  } catch (const comet::Error& e) {
    std::cerr << "error: " << comet::error_code_name(e.code()) << ": "
              << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << std::endl;
    return 1;
  }
}
