/*@ requires x > -2147483647;
    ensures \result >= 0;
    ensures \result == x || \result == -x;
    assigns \nothing; */
int abs_value(int x) {
  if (x < 0) {
    return -x;
  }
  return x;
}
