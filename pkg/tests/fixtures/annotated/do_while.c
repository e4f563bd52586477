/*@ requires n >= 1;
    ensures \result >= 1;
    assigns \nothing; */
int count_down(int n) {
  int steps = 0;
  /*@ loop invariant n >= 0;
      loop assigns n, steps;
      loop variant n; */
  do {
    n--;
    steps++;
  } while (n > 0);
  return steps;
}
