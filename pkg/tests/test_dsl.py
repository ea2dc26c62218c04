"""
DSL tests.
Tests for parsing, canonical printing, type checking, plan shapes and claim compilation.
"""
import numpy as np
import pytest

from src.claims.models import (
    Claim,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    Scope,
    SimpleStructure,
)
from src.common.errors import (
    CompilationError,
    DslNameError,
    DslSyntaxError,
    DslTypeError,
    UnsupportedShapeError,
)
from src.dsl import (
    AGG_FUNCTIONS,
    AggExpr,
    Aggregate,
    BoolOp,
    Check,
    ColumnRef,
    Compare,
    Filter,
    Literal,
    Map,
    PromptExpr,
    Scan,
    WithRank,
    chain,
    claim_structure_of,
    compile_claim,
    depth,
    formula_text,
    parse,
    parse_expr,
    plan_shape,
    print_plan,
    render_program,
    render_program_text,
    typecheck,
)
from src.oracle.backends import TextRule
from src.oracle.models import ReturnKind, ReturnType
from src.relation.models import AttributeSpec, AttrType, Schema
from conftest import COMPLAINT, DINNER, PRAISE

COUNT_PROGRAM = (
    'df.filter(col("stars") <= 2)\n'
    f'.map(prompt("{COMPLAINT}", bool).alias("holds"))\n'
    '.aggregate([count_if(col("holds")).alias("count")])\n'
    '.check(col("count") >= 2)'
)

NESTED_PROGRAM = (
    f'df.aggregate([proportion(prompt("{PRAISE}")).alias("share")], group_by=[col("business")])\n'
    '.aggregate([bool_and(col("share") > 0.5).alias("all_groups")])\n'
    '.check(col("all_groups"))'
)

ORDINAL_PROGRAM = (
    f'df.aggregate([count_if(prompt("{COMPLAINT}")).alias("score")], group_by=[col("business")])\n'
    '.with_rank(col("score"))\n'
    '.filter(col("business").eq("loc_b"))\n'
    '.check(col("rank").eq(1))'
)

NESTED_FIGURE = '''df.map(
  prompt(
    "Identify whether the {text} is a complaint about "
    "poor service quality", bool
  ).alias("complains_about_service")
)
.aggregate([
  count_if(
    col("complains_about_service")
  ).alias("complaint_count")],
  group_by=[col("business_id")]
)
.aggregate([
  bool_and(
    col("complaint_count") >= 2
  ).alias("all_have_multiple_complaints")
])
.check(col("all_have_multiple_complaints"))
.collect()'''

ORDINAL_FIGURE = '''df.filter(
  prompt(
    "The {text} mentions the service at the restaurant"
  )
)
.map(
  prompt(
    "Identify whether the {text} praises or speaks "
    "positively about the service at the restaurant", bool
  ).alias("praises_service")
)
.aggregate([
  proportion(
    col("praises_service")
  ).alias("service_praise_prop")],
  group_by=[col("business_id")]
)
.with_rank(col("service_praise_prop"))
.filter(col("business_id").eq("[A]"))
.check(col("rank").eq(1))
.collect()'''

_NAMES = ("stars", "business", "review", "holds", "n", "share")
_TEMPLATES = (COMPLAINT, PRAISE, DINNER, 'Is the {review} "quoted"?\nSecond line')
_OPS = tuple(ComparisonOp)


def _random_literal(rng):
    kind = int(rng.integers(4))
    if kind == 0:
        return Literal(bool(rng.integers(2)))
    if kind == 1:
        return Literal(int(rng.integers(-5, 100)))
    if kind == 2:
        return Literal(round(float(rng.uniform(-2, 2)), 3))
    return Literal(_NAMES[int(rng.integers(len(_NAMES)))] + "_é")


def _random_prompt(rng):
    template = _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
    kinds = (ReturnType.boolean(), ReturnType(kind=ReturnKind.INT), ReturnType(kind=ReturnKind.REAL),
             ReturnType.enum("food", "service"))
    return PromptExpr(template, kinds[int(rng.integers(len(kinds)))])


def _random_expr(rng, levels=3):
    leaf = levels == 0 or rng.random() < 0.3
    if leaf:
        choice = int(rng.integers(3))
        if choice == 0:
            return ColumnRef(_NAMES[int(rng.integers(len(_NAMES)))])
        if choice == 1:
            return _random_literal(rng)
        return _random_prompt(rng)
    choice = int(rng.integers(4))
    if choice == 0:
        op = _OPS[int(rng.integers(len(_OPS)))]
        return Compare(_random_expr(rng, levels - 1), op, _random_expr(rng, levels - 1))
    if choice == 1:
        return BoolOp("not", (_random_expr(rng, levels - 1),))
    op = "and" if choice == 2 else "or"
    return BoolOp(op, (_random_expr(rng, levels - 1), _random_expr(rng, levels - 1)))


def _random_plan(rng):
    plan = Scan()
    for _ in range(int(rng.integers(0, 4))):
        kind = int(rng.integers(3))
        if kind == 0:
            plan = Filter(plan, _random_expr(rng))
        elif kind == 1:
            plan = Map(plan, _random_expr(rng), _NAMES[int(rng.integers(len(_NAMES)))])
        else:
            plan = WithRank(plan, _random_expr(rng, 1), descending=bool(rng.integers(2)))
    for _ in range(int(rng.integers(0, 3))):
        aggs = tuple(AggExpr(AGG_FUNCTIONS[int(rng.integers(len(AGG_FUNCTIONS)))], _random_expr(rng), f"a{i}")
                     for i in range(int(rng.integers(1, 3))))
        keys = tuple(ColumnRef(_NAMES[int(k)]) for k in rng.integers(len(_NAMES), size=int(rng.integers(0, 3))))
        plan = Aggregate(plan, aggs, keys)
    return Check(plan, _random_expr(rng))


@pytest.fixture
def figure_schema():
    return Schema(attributes=[
        AttributeSpec(name="business_id", type=AttrType.CATEGORICAL, description="restaurant location"),
        AttributeSpec(name="text", type=AttrType.TEXT, description="review text"),
    ])


class TestParser:
    """Tests for parsing method-chain programs."""

    def test_operator_chain(self):
        plan = parse(COUNT_PROGRAM)
        kinds = [type(node) for node in chain(plan)]
        assert kinds == [Scan, Filter, Map, Aggregate, Check]
        assert isinstance(chain(plan)[2].expr, PromptExpr)
        assert chain(plan)[2].out_name == "holds"

    def test_print_is_canonical(self):
        for program in (COUNT_PROGRAM, NESTED_PROGRAM, ORDINAL_PROGRAM):
            plan = parse(program)
            assert parse(print_plan(plan)) == plan
            assert print_plan(parse(print_plan(plan))) == print_plan(plan)

    def test_collect_is_ignored(self):
        assert parse(COUNT_PROGRAM + ".collect()") == parse(COUNT_PROGRAM)

    def test_with_rank_ascending(self):
        plan = parse(ORDINAL_PROGRAM.replace('.with_rank(col("score"))', '.with_rank(col("score"), descending=False)'))
        rank = next(n for n in chain(plan) if isinstance(n, WithRank))
        assert rank.descending is False
        assert "descending=False" in print_plan(plan)

    def test_enum_prompt(self):
        program = ('df.aggregate([count_if(prompt("What is the {review} about?", enum("food", "service"))'
                   '.eq("food")).alias("n")]).check(col("n") >= 1)')
        plan = parse(program)
        assert parse(print_plan(plan)) == plan

    def test_missing_scan(self):
        with pytest.raises(DslSyntaxError, match="missing Scan"):
            parse('check(col("x"))')

    def test_unknown_relation(self):
        with pytest.raises(DslNameError) as exc_info:
            parse('reviews.check(col("x"))')
        assert exc_info.value.token == "reviews"

    def test_unknown_operator(self):
        with pytest.raises(DslNameError) as exc_info:
            parse('df.chek(col("x"))')
        assert exc_info.value.token == "chek"

    def test_must_end_with_check(self):
        with pytest.raises(DslSyntaxError):
            parse('df.filter(col("stars") <= 2)')

    def test_invalid_syntax(self):
        with pytest.raises(DslSyntaxError):
            parse('df.filter(col("stars") <= )')

    def test_python_boolean_keywords_rejected(self):
        with pytest.raises(DslSyntaxError):
            parse('df.filter(col("a") and col("b")).aggregate([bool_or(col("a")).alias("x")]).check(col("x"))')

    def test_empty_program(self):
        with pytest.raises(DslSyntaxError):
            parse("   ")

    def test_parse_expr(self):
        expr = parse_expr('col("stars") <= 2')
        assert expr.op == ComparisonOp.LE


class TestRoundTrip:
    """Printing then parsing returns the same plan."""

    def test_generated_plans(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            plan = _random_plan(rng)
            text = print_plan(plan)
            assert parse(text) == plan, text
            assert print_plan(parse(text)) == text


class TestFigures:
    """The nested and ordinal programs from the query-language examples."""

    def test_nested_figure(self, figure_schema):
        plan = parse(NESTED_FIGURE, figure_schema)
        assert depth(plan) == 5
        assert [type(n) for n in chain(plan)] == [Scan, Map, Aggregate, Aggregate, Check]
        assert claim_structure_of(plan) == NestedStructure(
            outer=Quantifier.forall(), group_keys=["business_id"],
            inner=Quantifier.cardinal(ComparisonOp.GE, 2))

    def test_ordinal_figure(self, figure_schema):
        plan = parse(ORDINAL_FIGURE, figure_schema)
        assert [type(n) for n in chain(plan)] == [Scan, Filter, Map, Aggregate, WithRank, Filter, Check]
        assert claim_structure_of(plan) == OrdinalStructure(
            group_keys=["business_id"], aggregate="proportion", target_group=["[A]"], target_rank=1)

    def test_figures_print_canonically(self):
        for program in (NESTED_FIGURE, ORDINAL_FIGURE):
            plan = parse(program)
            assert parse(print_plan(plan)) == plan


class TestTypecheck:
    """Tests for static typing against the schema."""

    def test_well_typed(self, review_schema):
        columns = typecheck(parse(COUNT_PROGRAM), review_schema)
        assert "count" in columns

    def test_unknown_attribute(self, review_schema):
        program = COUNT_PROGRAM.replace('col("stars")', 'col("rating")')
        with pytest.raises(DslNameError) as exc_info:
            parse(program, review_schema)
        assert exc_info.value.token == "rating"

    def test_unknown_placeholder(self, review_schema):
        program = COUNT_PROGRAM.replace("{review}", "{comment}")
        with pytest.raises(DslNameError):
            parse(program, review_schema)

    def test_text_vs_number(self, review_schema):
        program = COUNT_PROGRAM.replace('col("stars") <= 2', 'col("review") <= 2')
        with pytest.raises(DslTypeError):
            parse(program, review_schema)

    def test_aggregate_needs_boolean(self, review_schema):
        with pytest.raises(DslTypeError):
            parse('df.aggregate([count_if(col("stars")).alias("n")]).check(col("n") >= 1)', review_schema)

    def test_enum_label_checked(self, review_schema):
        program = ('df.aggregate([count_if(prompt("What is the {review} about?", enum("food", "service"))'
                   '.eq("parking")).alias("n")]).check(col("n") >= 1)')
        with pytest.raises(DslTypeError):
            parse(program, review_schema)


class TestShape:
    """Tests for reading claim structures back from plans."""

    def test_simple(self):
        assert claim_structure_of(parse(COUNT_PROGRAM)) == SimpleStructure(
            quantifier=Quantifier.cardinal(ComparisonOp.GE, 2))

    def test_nested(self):
        structure = claim_structure_of(parse(NESTED_PROGRAM))
        assert structure == NestedStructure(
            outer=Quantifier.forall(), group_keys=["business"],
            inner=Quantifier.proportional(ComparisonOp.GT, 0.5))

    def test_ordinal(self):
        structure = claim_structure_of(parse(ORDINAL_PROGRAM))
        assert structure == OrdinalStructure(group_keys=["business"], aggregate="count",
                                             target_group=["loc_b"], target_rank=1)

    def test_no_aggregate(self):
        with pytest.raises(UnsupportedShapeError):
            plan_shape(parse("df.check(lit(True))"))

    def test_rank_must_be_integer(self):
        with pytest.raises(UnsupportedShapeError):
            plan_shape(parse(ORDINAL_PROGRAM.replace(".eq(1)", ".eq(1.5)")))

    def test_formula_inlines_maps(self):
        shape = plan_shape(parse(COUNT_PROGRAM))
        assert formula_text(shape.inner) == f'prompt("{COMPLAINT}", bool)'


class TestRenderProgram:
    """Tests for canonical programs built from known structures."""

    @pytest.mark.parametrize("structure", [
        SimpleStructure(quantifier=Quantifier.exists()),
        SimpleStructure(quantifier=Quantifier.proportional(ComparisonOp.GT, 0.25)),
        NestedStructure(outer=Quantifier.cardinal(ComparisonOp.GE, 2), group_keys=["business"],
                        inner=Quantifier.cardinal(ComparisonOp.GE, 1)),
        OrdinalStructure(group_keys=["business"], target_group=["loc_a"], descending=False),
    ])
    def test_structure_survives(self, structure, review_schema):
        claim = Claim(id="c", text="claim", structure=structure, formula_prompt=PRAISE,
                      scope=Scope(semantic=DINNER, symbolic='col("stars") >= 3'))
        plan = render_program(claim)
        typecheck(plan, review_schema)
        assert claim_structure_of(plan) == structure
        assert parse(render_program_text(claim)) == plan

    def test_needs_formula(self):
        with pytest.raises(ValueError):
            render_program(Claim(text="x", structure=SimpleStructure(quantifier=Quantifier.exists())))


class TestCompile:
    """Tests for oracle-driven compilation."""

    def test_compiles_scripted_program(self, oracle, scripted_rules, review_schema):
        claim = Claim(id="c1", text="At least two low-star reviews complain about service.")
        scripted_rules.text["compile"] = TextRule(key="claim", responses={
            claim.text: f"```python\n{COUNT_PROGRAM}\n```",
        })
        plan = compile_claim(claim, review_schema, "", oracle)
        assert plan == parse(COUNT_PROGRAM)

    def test_gives_up_after_three_attempts(self, oracle, scripted_rules, review_schema):
        scripted_rules.text["compile"] = TextRule(key="claim", default="this is not a program")
        with pytest.raises(CompilationError) as exc_info:
            compile_claim(Claim(id="c2", text="Nobody knows."), review_schema, "", oracle)
        assert len(exc_info.value.attempts) == 3
        assert all(a["program"] == "this is not a program" for a in exc_info.value.attempts)
