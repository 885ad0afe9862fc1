#include <cstdio>
int main() { std::puts("eslab: placeholder"); return 0; }
