/*@ assigns \nothing; */
int identity_2(int x) {
  return x;
}
