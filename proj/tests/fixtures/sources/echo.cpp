#include <iostream>
int main() {
    std::cin.tie(nullptr);
    std::string all, line;
    while (std::getline(std::cin, line)) all += line + "\n";
    std::cout << all;
    return 0;
}
