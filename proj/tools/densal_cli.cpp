#include <cstdio>

int main() {
  std::puts("densal: subcommands not wired yet");
  return 1;
}
