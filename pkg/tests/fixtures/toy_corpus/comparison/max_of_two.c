int max_of_two(int a, int b) {
  if (a >= b) {
    return a;
  }
  return b;
}
