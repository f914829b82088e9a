#include "sinnet/allocator.hpp"
#include "sinnet/cli.hpp"

int main(int argc, char** argv) {
  sinnet::tune_allocator();
  return sinnet::cli::run(argc, argv);
}
