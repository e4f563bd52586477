"""Show the four syntactic-construct configurations, compliance checking,
and the prompts they produce.

Run from the repository root:  python3 demos/02_configurations_and_prompts.py
"""

from specloop import (
    Annotation,
    ConstructKind,
    FunctionContract,
    SpecificationSet,
    build_generation_prompt,
    canonical_config,
    check_compliance,
)


class Demo:
    id = "demo"
    source = "int twice(int x) { return 2 * x; }"


for name in ("CB", "CV", "CA", "CF"):
    config = canonical_config(name)
    permitted = ", ".join(sorted(k.keyword for k in config.permitted))
    mandatory = ", ".join(sorted(k.keyword for k in config.mandatory)) or "-"
    print(f"{name}: permitted = {{{permitted}}}")
    print(f"    mandatory = {{{mandatory}}}")

fn = FunctionContract("twice")
basic_only = SpecificationSet([
    Annotation(ConstructKind.REQUIRES, "requires x >= 0;", fn),
    Annotation(ConstructKind.ENSURES, "ensures \\result == 2 * x;", fn),
])
with_lemma = SpecificationSet(list(basic_only) + [
    Annotation(ConstructKind.LEMMA, "lemma twice_even: \\forall integer x; (2 * x) % 2 == 0;"),
])

print("\ncompliance of a basic-only specification:")
for name in ("CB", "CV", "CA", "CF"):
    verdict = check_compliance(basic_only, canonical_config(name))
    print(f"  {name}: compliant={verdict.compliant} "
          f"(mandatory_missing={verdict.mandatory_missing}, "
          f"forbidden={sorted(k.keyword for k in verdict.forbidden_used)})")

print("\nthe same specification plus a lemma:")
for name in ("CB", "CV", "CA", "CF"):
    verdict = check_compliance(with_lemma, canonical_config(name))
    print(f"  {name}: compliant={verdict.compliant} "
          f"(mandatory_missing={verdict.mandatory_missing}, "
          f"forbidden={sorted(k.keyword for k in verdict.forbidden_used)})")

print("\n--- generation prompt under CV ---")
print(build_generation_prompt(Demo(), canonical_config("CV")))
