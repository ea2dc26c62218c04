"""
DSL Parser - 方法链语法解析

程序文本包一层括号后交给 Python 的 ast 模块做词法/语法分析,
再把调用链翻译成算子树. 报错位置换算回原文的行列.
"""
import ast
from typing import Any, List, Optional, Tuple

from src.claims.models import ComparisonOp
from src.common.errors import DslNameError, DslSyntaxError
from src.oracle.models import ReturnKind, ReturnType
from src.relation.models import Schema
from .models import (
    AGG_FUNCTIONS,
    AggExpr,
    Aggregate,
    BoolOp,
    Check,
    ColumnRef,
    Compare,
    Expr,
    Filter,
    Literal,
    Map,
    PlanNode,
    PromptExpr,
    Scan,
    WithRank,
)
from .typecheck import typecheck

_SYMBOL_OPS = {
    ast.GtE: ComparisonOp.GE,
    ast.Gt: ComparisonOp.GT,
    ast.LtE: ComparisonOp.LE,
    ast.Lt: ComparisonOp.LT,
    ast.Eq: ComparisonOp.EQ,
    ast.NotEq: ComparisonOp.NE,
}

_METHOD_OPS = {
    "eq": ComparisonOp.EQ,
    "ne": ComparisonOp.NE,
    "ge": ComparisonOp.GE,
    "gt": ComparisonOp.GT,
    "le": ComparisonOp.LE,
    "lt": ComparisonOp.LT,
}

_RETURN_TYPES = {
    "bool": ReturnType(kind=ReturnKind.BOOL),
    "int": ReturnType(kind=ReturnKind.INT),
    "float": ReturnType(kind=ReturnKind.REAL),
}

_OPERATORS = ("filter", "map", "aggregate", "with_rank", "check", "collect")


def _pos(node: ast.AST) -> Tuple[int, int]:
    # one line of wrapping parenthesis precedes the program
    return getattr(node, "lineno", 2) - 1, getattr(node, "col_offset", 0) + 1


def _token(node: ast.AST) -> str:
    try:
        return ast.unparse(node)
    except Exception:
        return type(node).__name__


def _syntax(message: str, node: ast.AST) -> DslSyntaxError:
    line, column = _pos(node)
    return DslSyntaxError(message, token=_token(node), line=line, column=column)


class _Parser:
    """Translates a Python expression AST into a plan."""

    def parse(self, source: str) -> PlanNode:
        if not source.strip():
            raise DslSyntaxError("empty program")
        try:
            tree = ast.parse("(\n" + source + "\n)", mode="eval")
        except SyntaxError as e:
            line = (e.lineno or 2) - 1
            token = (e.text or "").strip()
            raise DslSyntaxError(f"invalid syntax: {e.msg}", token=token, line=line, column=e.offset)

        start, calls = self._unwind(tree.body)
        plan: Optional[PlanNode] = None
        if start is not None:
            plan = Scan(relation="df", pos=_pos(start))
        elif calls and calls[0][0] != "check":
            plan = Scan(relation="df", pos=_pos(calls[0][1]))

        for i, (name, call) in enumerate(calls):
            if name == "collect":
                if i != len(calls) - 1:
                    raise _syntax("collect() must be the last call", call)
                if call.args or call.keywords:
                    raise _syntax("collect() takes no arguments", call)
                continue
            if plan is None:
                raise _syntax("missing Scan: the program has no input relation", call)
            if isinstance(plan, Check):
                raise _syntax("check() must be the last operator", call)
            plan = self._operator(name, call, plan)

        if not isinstance(plan, Check):
            raise DslSyntaxError("program must end with check()", token=calls[-1][0] if calls else "")
        return plan

    # ------------------------------------------------------------ chain

    def _unwind(self, node: ast.AST) -> Tuple[Optional[ast.AST], List[Tuple[str, ast.Call]]]:
        """Return (df name node or None for an implicit scan, calls leaf-first)."""
        calls: List[Tuple[str, ast.Call]] = []
        while True:
            if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
                calls.append((node.func.attr, node))
                node = node.func.value
            elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
                calls.append((node.func.id, node))
                start = None
                break
            elif isinstance(node, ast.Name):
                if node.id != "df":
                    line, column = _pos(node)
                    raise DslNameError("unknown relation", token=node.id, line=line, column=column)
                start = node
                break
            else:
                raise _syntax("expected an operator chain starting at df", node)
        calls.reverse()
        for name, call in calls:
            if name not in _OPERATORS:
                line, column = _pos(call)
                raise DslNameError("unknown operator", token=name, line=line, column=column)
        return start, calls

    def _operator(self, name: str, call: ast.Call, child: PlanNode) -> PlanNode:
        pos = _pos(call)
        if name == "filter":
            return Filter(child=child, expr=self.expr(self._single_arg(call, "predicate")), pos=pos)
        if name == "map":
            expr, alias = self._aliased(self._single_arg(call, "expr"))
            return Map(child=child, expr=self.expr(expr), out_name=alias, pos=pos)
        if name == "check":
            return Check(child=child, expr=self.expr(self._single_arg(call, "predicate")), pos=pos)
        if name == "with_rank":
            return self._with_rank(call, child)
        return self._aggregate(call, child)

    @staticmethod
    def _single_arg(call: ast.Call, keyword: str) -> ast.AST:
        args = list(call.args) + [k.value for k in call.keywords if k.arg == keyword]
        extra = [k for k in call.keywords if k.arg != keyword]
        if len(args) != 1 or extra:
            raise _syntax("expected exactly one argument", call)
        return args[0]

    def _aliased(self, node: ast.AST) -> Tuple[ast.AST, str]:
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute)
                and node.func.attr == "alias"):
            if len(node.args) != 1 or not _is_str(node.args[0]):
                raise _syntax("alias() takes one string", node)
            return node.func.value, node.args[0].value
        raise _syntax("expression needs .alias(\"name\")", node)

    def _aggregate(self, call: ast.Call, child: PlanNode) -> Aggregate:
        args = list(call.args)
        keywords = {k.arg: k.value for k in call.keywords}
        unknown = set(keywords) - {"agg_exprs", "group_by"}
        if unknown:
            raise _syntax(f"unknown argument {sorted(unknown)[0]}", call)
        agg_node = args[0] if args else keywords.get("agg_exprs")
        group_node = args[1] if len(args) > 1 else keywords.get("group_by")
        if agg_node is None or len(args) > 2:
            raise _syntax("aggregate() takes a list of aggregate expressions", call)
        if not isinstance(agg_node, (ast.List, ast.Tuple)) or not agg_node.elts:
            raise _syntax("aggregate expressions must be a non-empty list", agg_node)

        aggs = []
        for element in agg_node.elts:
            inner, alias = self._aliased(element)
            if not (isinstance(inner, ast.Call) and isinstance(inner.func, ast.Name)):
                raise _syntax("expected an aggregate function", inner)
            fn = inner.func.id
            if fn not in AGG_FUNCTIONS:
                line, column = _pos(inner)
                raise DslNameError("unknown aggregate function", token=fn, line=line, column=column)
            if len(inner.args) != 1 or inner.keywords:
                raise _syntax(f"{fn}() takes one expression", inner)
            aggs.append(AggExpr(fn=fn, arg=self.expr(inner.args[0]), out_name=alias, pos=_pos(inner)))

        group_by: List[ColumnRef] = []
        if group_node is not None:
            if not isinstance(group_node, (ast.List, ast.Tuple)):
                raise _syntax("group_by must be a list of col(...)", group_node)
            for element in group_node.elts:
                ref = self.expr(element)
                if not isinstance(ref, ColumnRef):
                    raise _syntax("group_by entries must be col(...)", element)
                group_by.append(ref)
        return Aggregate(child=child, aggs=tuple(aggs), group_by=tuple(group_by), pos=_pos(call))

    def _with_rank(self, call: ast.Call, child: PlanNode) -> WithRank:
        args = list(call.args)
        keywords = {k.arg: k.value for k in call.keywords}
        if set(keywords) - {"expr", "descending"}:
            raise _syntax("unknown argument to with_rank()", call)
        expr_node = args[0] if args else keywords.get("expr")
        desc_node = args[1] if len(args) > 1 else keywords.get("descending")
        if expr_node is None or len(args) > 2:
            raise _syntax("with_rank() takes an expression", call)
        descending = True
        if desc_node is not None:
            if not (isinstance(desc_node, ast.Constant) and isinstance(desc_node.value, bool)):
                raise _syntax("descending must be True or False", desc_node)
            descending = desc_node.value
        return WithRank(child=child, expr=self.expr(expr_node), descending=descending, pos=_pos(call))

    # ------------------------------------------------------------ expressions

    def expr(self, node: ast.AST) -> Expr:
        pos = _pos(node)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (str, bool, int, float)):
                return Literal(node.value, pos=pos)
            raise _syntax("unsupported literal", node)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub) and isinstance(node.operand, ast.Constant) \
                    and isinstance(node.operand.value, (int, float)) and not isinstance(node.operand.value, bool):
                return Literal(-node.operand.value, pos=pos)
            if isinstance(node.op, ast.Invert):
                return BoolOp("not", (self.expr(node.operand),), pos=pos)
            raise _syntax("unsupported unary operator", node)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.BitAnd):
                return BoolOp("and", (self.expr(node.left), self.expr(node.right)), pos=pos)
            if isinstance(node.op, ast.BitOr):
                return BoolOp("or", (self.expr(node.left), self.expr(node.right)), pos=pos)
            raise _syntax("unsupported operator; use & | ~ for boolean logic", node)
        if isinstance(node, ast.BoolOp):
            raise _syntax("use & and | instead of 'and'/'or'", node)
        if isinstance(node, ast.Compare):
            if len(node.ops) != 1:
                raise _syntax("chained comparisons are not supported", node)
            op = _SYMBOL_OPS.get(type(node.ops[0]))
            if op is None:
                raise _syntax("unsupported comparison", node)
            return Compare(self.expr(node.left), op, self.expr(node.comparators[0]), pos=pos)
        if isinstance(node, ast.Call):
            return self._call_expr(node)
        if isinstance(node, ast.Name):
            line, column = pos
            raise DslNameError("bare name; use col(\"...\")", token=node.id, line=line, column=column)
        raise _syntax("unsupported expression", node)

    def _call_expr(self, node: ast.Call) -> Expr:
        pos = _pos(node)
        func = node.func
        if isinstance(func, ast.Attribute):
            if func.attr in _METHOD_OPS:
                if len(node.args) != 1 or node.keywords:
                    raise _syntax(f".{func.attr}() takes one argument", node)
                return Compare(self.expr(func.value), _METHOD_OPS[func.attr], self.expr(node.args[0]), pos=pos)
            if func.attr == "alias":
                raise _syntax("alias() is only allowed in map() and aggregate()", node)
            line, column = pos
            raise DslNameError("unknown method", token=func.attr, line=line, column=column)
        if not isinstance(func, ast.Name):
            raise _syntax("unsupported call", node)

        if func.id == "col":
            if len(node.args) != 1 or not _is_str(node.args[0]) or node.keywords:
                raise _syntax("col() takes one column name", node)
            return ColumnRef(node.args[0].value, pos=pos)
        if func.id == "lit":
            if len(node.args) != 1 or node.keywords:
                raise _syntax("lit() takes one value", node)
            value = self.expr(node.args[0])
            if not isinstance(value, Literal):
                raise _syntax("lit() takes a constant", node)
            return Literal(value.value, pos=pos)
        if func.id == "prompt":
            return self._prompt(node)
        line, column = pos
        if func.id in AGG_FUNCTIONS:
            raise _syntax(f"{func.id}() is only allowed inside aggregate()", node)
        raise DslNameError("unknown function", token=func.id, line=line, column=column)

    def _prompt(self, node: ast.Call) -> PromptExpr:
        args = list(node.args)
        keywords = {k.arg: k.value for k in node.keywords}
        if set(keywords) - {"prompt_str", "return_type"}:
            raise _syntax("unknown argument to prompt()", node)
        template = args[0] if args else keywords.get("prompt_str")
        type_node = args[1] if len(args) > 1 else keywords.get("return_type")
        if template is None or not _is_str(template) or len(args) > 2:
            raise _syntax("prompt() takes a template string", node)
        return PromptExpr(template.value, self._return_type(type_node), pos=_pos(node))

    @staticmethod
    def _return_type(node: Optional[ast.AST]) -> ReturnType:
        if node is None:
            return ReturnType.boolean()
        if isinstance(node, ast.Name) and node.id in _RETURN_TYPES:
            return _RETURN_TYPES[node.id]
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "enum":
            if not node.args or not all(_is_str(a) for a in node.args) or node.keywords:
                raise _syntax("enum() takes label strings", node)
            labels = tuple(a.value for a in node.args)
            if len(set(labels)) != len(labels):
                raise _syntax("duplicate enum label", node)
            return ReturnType.enum(*labels)
        raise _syntax("return type must be bool, int, float or enum(...)", node)


def _is_str(node: Any) -> bool:
    return isinstance(node, ast.Constant) and isinstance(node.value, str)


def parse(program: str, schema: Optional[Schema] = None) -> PlanNode:
    """Parse a verification query; with a schema the plan is also type-checked."""
    plan = _Parser().parse(program)
    if schema is not None:
        typecheck(plan, schema)
    return plan


def parse_expr(source: str) -> Expr:
    """Parse a standalone expression (claim scopes in claim files)."""
    try:
        tree = ast.parse("(\n" + source + "\n)", mode="eval")
    except SyntaxError as e:
        raise DslSyntaxError(f"invalid syntax: {e.msg}", token=(e.text or "").strip(),
                             line=(e.lineno or 2) - 1, column=e.offset)
    return _Parser().expr(tree.body)
