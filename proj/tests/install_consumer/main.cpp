#include <pimsner/lift.hpp>
#include <iostream>
int main() { std::cout << pimsner::schur_oracle(4, 2, 0, 0, pimsner::Sided::two).num << "\n"; }
