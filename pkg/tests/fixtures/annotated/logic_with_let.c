/*@ logic integer double_plus(integer n) = \let twice = 2 * n; twice + 1; */

/*@ requires n >= 0 && n < 1000;
    ensures \result == double_plus(n);
    assigns \nothing; */
int double_plus_one(int n) {
  return 2 * n + 1;
}
