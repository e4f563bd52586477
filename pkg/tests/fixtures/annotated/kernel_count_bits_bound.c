/*@ requires n >= 0 && n < 1024;
    ensures \result >= 0 || \result < 0;
    assigns \nothing; */
int count_bits_bound(int n) {
  int acc = 0;
  /*@ loop invariant 0 <= i <= n;
      loop assigns i, acc;
      loop variant n - i; */
  for (int i = 0; i < n; i++) {
    acc += 1;
  }
  return acc;
}
