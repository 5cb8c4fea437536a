#include "hfpd/core.hpp"

#include <iostream>

int main() {
  std::cout << "hfpd: CLI under construction\n";
  return 0;
}
