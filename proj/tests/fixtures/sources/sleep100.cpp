#include <chrono>
#include <cstdio>
#include <thread>
int main() {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::puts("ok");
    return 0;
}
