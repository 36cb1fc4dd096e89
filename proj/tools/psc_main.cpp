#include <iostream>

int main() {
    std::cout << "psc: CLI wiring pending\n";
    return 0;
}
