"""Tokenizer, syntax tree, and recursive-descent parser for SQL SELECT statements.

The grammar covers the query shapes this toolkit generates and consumes:
single SELECT cores with joins (explicit and comma-list), WHERE / GROUP BY /
HAVING / ORDER BY / LIMIT / OFFSET, set operators (UNION / INTERSECT / EXCEPT
with optional ALL), sub-selects in FROM and in expressions, WITH common table
expressions, CASE / CAST / EXISTS / IN / BETWEEN / LIKE / IS NULL, typed
literals (DATE '...', INTERVAL '...'), and quoted identifiers.

It is deliberately a validating parser: malformed statements raise
:class:`~sqlsynth.errors.SqlSyntaxError` with the offending position, which is
what the downstream syntax filter reports.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields

from .errors import SqlSyntaxError

# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<line_comment>--[^\n]*)
    | (?P<block_comment>/\*.*?\*/)
    | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9$]*)
    | (?P<string>'(?:[^']|'')*')
    | (?P<qname>"(?:[^"]|"")*"|`[^`]*`)
    | (?P<op><=|>=|<>|!=|\|\||[=<>+\-*/%(),.;])
    """,
    re.VERBOSE | re.DOTALL,
)

#: Words that terminate an implicit alias and may not be used unquoted as one.
RESERVED_WORDS = frozenset(
    """
    all and as asc between by case cast cross desc distinct else end escape
    except exists from full group having in inner intersect interval is join
    left like limit not null offset on or order outer right select then union
    using when where with
    """.split()
)

_CURRENT_FUNCS = frozenset({"current_date", "current_time", "current_timestamp"})
_INTERVAL_UNITS = frozenset(
    "year years quarter quarters month months week weeks day days "
    "hour hours minute minutes second seconds".split()
)


@dataclass
class Token:
    kind: str  # 'number' | 'name' | 'string' | 'qname' | 'op' | 'end'
    text: str
    pos: int
    line: int
    col: int

    @property
    def norm(self) -> str:
        """Lower-cased token text; quoted identifiers are unwrapped."""
        if self.kind == "qname":
            body = self.text[1:-1]
            if self.text[0] == '"':
                body = body.replace('""', '"')
            return body.lower()
        return self.text.lower()


def tokenize(sql: str) -> list[Token]:
    """Split ``sql`` into tokens, dropping whitespace and comments."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(sql)
    while pos < n:
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            ch = sql[pos]
            if ch == "'":
                msg = "unterminated string literal"
            elif sql.startswith("/*", pos):
                msg = "unterminated block comment"
            else:
                msg = f"unexpected character {ch!r}"
            raise SqlSyntaxError(msg, pos, line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "line_comment", "block_comment"):
            tokens.append(Token(kind, text, pos, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("end", "", pos, line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Syntax tree nodes
# ---------------------------------------------------------------------------


class Node:
    """Base class for all syntax tree nodes."""


@dataclass
class Literal(Node):
    kind: str  # 'number' | 'string' | 'null' | 'boolean' | 'date' | 'interval'
    text: str


@dataclass
class ColumnRef(Node):
    table: str | None
    name: str


@dataclass
class Star(Node):
    table: str | None = None


@dataclass
class Window(Node):
    """An OVER clause: partitioning, ordering, and an optional frame.

    The frame is kept as canonical text only; nothing downstream inspects
    frame bounds.
    """

    partition_by: list[Node] = field(default_factory=list)
    order_by: list["OrderItem"] = field(default_factory=list)
    frame: str | None = None


@dataclass
class FuncCall(Node):
    name: str
    args: list[Node] = field(default_factory=list)
    distinct: bool = False
    star: bool = False
    over: Window | None = None


@dataclass
class Unary(Node):
    op: str  # '-' | '+' | 'not'
    operand: Node


@dataclass
class Binary(Node):
    op: str  # comparison, arithmetic, 'and', 'or', '||'
    left: Node
    right: Node


@dataclass
class Between(Node):
    expr: Node
    low: Node
    high: Node
    negated: bool = False


@dataclass
class InList(Node):
    expr: Node
    items: list[Node] = field(default_factory=list)
    negated: bool = False


@dataclass
class InSubquery(Node):
    expr: Node
    query: "Query" = None
    negated: bool = False


@dataclass
class Like(Node):
    expr: Node
    pattern: Node
    negated: bool = False
    escape: Node | None = None


@dataclass
class IsNull(Node):
    expr: Node
    negated: bool = False


@dataclass
class Exists(Node):
    query: "Query"
    negated: bool = False


@dataclass
class Case(Node):
    operand: Node | None
    whens: list[tuple]  # (condition, result) pairs
    else_: Node | None


@dataclass
class Cast(Node):
    expr: Node
    type_name: str


@dataclass
class ScalarSubquery(Node):
    query: "Query"


@dataclass
class SelectItem(Node):
    expr: Node
    alias: str | None = None


@dataclass
class TableName(Node):
    name: str
    alias: str | None = None


@dataclass
class DerivedTable(Node):
    query: "Query"
    alias: str


@dataclass
class Join(Node):
    left: Node
    right: Node
    kind: str  # 'inner' | 'left' | 'right' | 'full' | 'cross'
    condition: Node | None = None
    using: list[str] = field(default_factory=list)


@dataclass
class SelectCore(Node):
    distinct: bool
    items: list[SelectItem]
    from_refs: list[Node]
    where: Node | None
    group_by: list[Node]
    having: Node | None


@dataclass
class SetOp(Node):
    op: str  # 'union' | 'intersect' | 'except'
    all: bool
    left: Node
    right: Node


@dataclass
class OrderItem(Node):
    expr: Node
    direction: str | None = None  # 'asc' | 'desc'


@dataclass
class Cte(Node):
    name: str
    columns: list[str]
    query: "Query" = None


@dataclass
class Query(Node):
    ctes: list[Cte]
    body: Node  # SelectCore | SetOp
    order_by: list[OrderItem]
    limit: Node | None = None
    offset: Node | None = None


def children(node: Node):
    """Yield the direct child nodes of ``node``."""
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, (list, tuple)):
            for item in value:
                if isinstance(item, Node):
                    yield item
                elif isinstance(item, tuple):
                    for sub in item:
                        if isinstance(sub, Node):
                            yield sub


def walk(node: Node):
    """Yield ``node`` and every descendant, depth first."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(children(current))


def iter_select_cores(node: Node):
    """Yield every SelectCore in the tree, outermost first."""
    for n in walk(node):
        if isinstance(n, SelectCore):
            yield n


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_COMPARISON_OPS = frozenset({"=", "<>", "!=", "<", "<=", ">", ">="})
_JOIN_INTRO = frozenset({"join", "inner", "left", "right", "full", "cross"})


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "end":
            self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        shown = tok.text if tok.kind != "end" else "end of input"
        raise SqlSyntaxError(f"{message} (got {shown!r})", tok.pos, tok.line, tok.col)

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.norm in words

    def take_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.next()
            return True
        return False

    def expect_kw(self, word: str):
        if not self.take_kw(word):
            self.error(f"expected {word.upper()}")

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def take_op(self, *ops: str) -> bool:
        if self.at_op(*ops):
            self.next()
            return True
        return False

    def expect_op(self, op: str):
        if not self.take_op(op):
            self.error(f"expected {op!r}")

    def expect_name(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.kind == "qname" or (tok.kind == "name" and tok.norm not in RESERVED_WORDS):
            self.next()
            return tok.norm
        self.error(f"expected {what}")

    # -- entry points -------------------------------------------------------

    def parse_statement(self) -> Query:
        query = self.parse_query()
        self.take_op(";")
        if self.peek().kind != "end":
            self.error("unexpected trailing input")
        return query

    def parse_query(self) -> Query:
        ctes: list[Cte] = []
        if self.take_kw("with"):
            if self.at_kw("recursive"):
                self.next()
            ctes.append(self._parse_cte())
            while self.take_op(","):
                ctes.append(self._parse_cte())
        body = self._parse_body()
        order_by: list[OrderItem] = []
        limit = offset = None
        if self.take_kw("order"):
            self.expect_kw("by")
            order_by.append(self._parse_order_item())
            while self.take_op(","):
                order_by.append(self._parse_order_item())
        if self.take_kw("limit"):
            limit = self.parse_expr()
            if self.take_op(","):
                # MySQL-style LIMIT offset, count
                offset = limit
                limit = self.parse_expr()
            elif self.take_kw("offset"):
                offset = self.parse_expr()
        return Query(ctes=ctes, body=body, order_by=order_by, limit=limit, offset=offset)

    def _parse_cte(self) -> Cte:
        name = self.expect_name("CTE name")
        columns: list[str] = []
        if self.take_op("("):
            columns.append(self.expect_name("column name"))
            while self.take_op(","):
                columns.append(self.expect_name("column name"))
            self.expect_op(")")
        self.expect_kw("as")
        self.expect_op("(")
        query = self.parse_query()
        self.expect_op(")")
        return Cte(name=name, columns=columns, query=query)

    # set operations: INTERSECT binds tighter than UNION / EXCEPT
    def _parse_body(self) -> Node:
        left = self._parse_body_term()
        while self.at_kw("union", "except"):
            op = self.next().norm
            all_flag = bool(self.take_kw("all"))
            self.take_kw("distinct")
            right = self._parse_body_term()
            left = SetOp(op=op, all=all_flag, left=left, right=right)
        return left

    def _parse_body_term(self) -> Node:
        left = self._parse_body_factor()
        while self.at_kw("intersect"):
            self.next()
            all_flag = bool(self.take_kw("all"))
            right = self._parse_body_factor()
            left = SetOp(op="intersect", all=all_flag, left=left, right=right)
        return left

    def _parse_body_factor(self) -> Node:
        if self.at_op("(") and self.peek(1).kind == "name" and self.peek(1).norm in ("select", "with"):
            self.next()
            inner = self.parse_query()
            self.expect_op(")")
            # A parenthesized query used as a set-operation operand; inner
            # ORDER BY / LIMIT are legal there, so keep the Query node.
            return inner
        return self._parse_select_core()

    def _parse_select_core(self) -> SelectCore:
        self.expect_kw("select")
        distinct = bool(self.take_kw("distinct"))
        if not distinct:
            self.take_kw("all")
        items = [self._parse_select_item()]
        while self.take_op(","):
            items.append(self._parse_select_item())
        from_refs: list[Node] = []
        where = having = None
        group_by: list[Node] = []
        if self.take_kw("from"):
            from_refs.append(self._parse_table_ref())
            while self.take_op(","):
                from_refs.append(self._parse_table_ref())
        if self.take_kw("where"):
            where = self.parse_expr()
        if self.take_kw("group"):
            self.expect_kw("by")
            group_by.append(self.parse_expr())
            while self.take_op(","):
                group_by.append(self.parse_expr())
        if self.take_kw("having"):
            having = self.parse_expr()
        return SelectCore(
            distinct=distinct,
            items=items,
            from_refs=from_refs,
            where=where,
            group_by=group_by,
            having=having,
        )

    def _parse_select_item(self) -> SelectItem:
        if self.at_op("*"):
            self.next()
            return SelectItem(expr=Star(), alias=None)
        expr = self.parse_expr()
        alias = self._parse_alias()
        return SelectItem(expr=expr, alias=alias)

    def _parse_alias(self) -> str | None:
        if self.take_kw("as"):
            return self.expect_name("alias")
        tok = self.peek()
        if tok.kind == "qname" or (tok.kind == "name" and tok.norm not in RESERVED_WORDS):
            self.next()
            return tok.norm
        return None

    # -- FROM clause --------------------------------------------------------

    def _parse_table_ref(self) -> Node:
        ref = self._parse_table_primary()
        while True:
            kind = self._peek_join_kind()
            if kind is None:
                return ref
            right = self._parse_table_primary()
            condition = None
            using: list[str] = []
            if kind != "cross":
                if self.take_kw("on"):
                    condition = self.parse_expr()
                elif self.take_kw("using"):
                    self.expect_op("(")
                    using.append(self.expect_name("column name"))
                    while self.take_op(","):
                        using.append(self.expect_name("column name"))
                    self.expect_op(")")
                else:
                    self.error("expected ON or USING after JOIN")
            ref = Join(left=ref, right=right, kind=kind, condition=condition, using=using)

    def _peek_join_kind(self) -> str | None:
        if self.at_kw("join"):
            self.next()
            return "inner"
        if self.at_kw("inner"):
            self.next()
            self.expect_kw("join")
            return "inner"
        for kind in ("left", "right", "full"):
            if self.at_kw(kind):
                self.next()
                self.take_kw("outer")
                self.expect_kw("join")
                return kind
        if self.at_kw("cross"):
            self.next()
            self.expect_kw("join")
            return "cross"
        return None

    def _parse_table_primary(self) -> Node:
        if self.take_op("("):
            if not self.at_kw("select", "with"):
                self.error("expected a sub-select inside parentheses in FROM")
            query = self.parse_query()
            self.expect_op(")")
            alias = self._parse_alias()
            if alias is None:
                self.error("a sub-select in FROM requires an alias")
            return DerivedTable(query=query, alias=alias)
        name = self.expect_name("table name")
        while self.take_op("."):
            name = f"{name}.{self.expect_name('table name')}"
        alias = self._parse_alias()
        return TableName(name=name, alias=alias)

    def _parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        direction = None
        if self.take_kw("asc"):
            direction = "asc"
        elif self.take_kw("desc"):
            direction = "desc"
        if self.take_kw("nulls"):
            if not (self.take_kw("first") or self.take_kw("last")):
                self.error("expected FIRST or LAST after NULLS")
        return OrderItem(expr=expr, direction=direction)

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> Node:
        return self._parse_or()

    def _parse_or(self) -> Node:
        left = self._parse_and()
        while self.at_kw("or"):
            self.next()
            left = Binary(op="or", left=left, right=self._parse_and())
        return left

    def _parse_and(self) -> Node:
        left = self._parse_not()
        while self.at_kw("and"):
            self.next()
            left = Binary(op="and", left=left, right=self._parse_not())
        return left

    def _parse_not(self) -> Node:
        if self.at_kw("not"):
            self.next()
            return Unary(op="not", operand=self._parse_not())
        return self._parse_predicate()

    def _parse_predicate(self) -> Node:
        left = self._parse_additive()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in _COMPARISON_OPS:
                self.next()
                left = Binary(op=tok.text, left=left, right=self._parse_additive())
                continue
            negated = False
            if self.at_kw("not") and self.peek(1).kind == "name" and self.peek(1).norm in (
                "in",
                "between",
                "like",
            ):
                self.next()
                negated = True
            if self.take_kw("in"):
                left = self._parse_in(left, negated)
                continue
            if self.take_kw("between"):
                low = self._parse_additive()
                self.expect_kw("and")
                high = self._parse_additive()
                left = Between(expr=left, low=low, high=high, negated=negated)
                continue
            if self.take_kw("like"):
                pattern = self._parse_additive()
                escape = None
                if self.take_kw("escape"):
                    escape = self._parse_additive()
                left = Like(expr=left, pattern=pattern, negated=negated, escape=escape)
                continue
            if negated:
                self.error("expected IN, BETWEEN, or LIKE after NOT")
            if self.at_kw("is"):
                self.next()
                neg = bool(self.take_kw("not"))
                self.expect_kw("null")
                left = IsNull(expr=left, negated=neg)
                continue
            return left

    def _parse_in(self, left: Node, negated: bool) -> Node:
        self.expect_op("(")
        if self.at_kw("select", "with"):
            query = self.parse_query()
            self.expect_op(")")
            return InSubquery(expr=left, query=query, negated=negated)
        items = [self.parse_expr()]
        while self.take_op(","):
            items.append(self.parse_expr())
        self.expect_op(")")
        return InList(expr=left, items=items, negated=negated)

    def _parse_additive(self) -> Node:
        left = self._parse_multiplicative()
        while True:
            if self.at_op("+", "-", "||"):
                op = self.next().text
                left = Binary(op=op, left=left, right=self._parse_multiplicative())
            else:
                return left

    def _parse_multiplicative(self) -> Node:
        left = self._parse_unary()
        while True:
            if self.at_op("*", "/", "%"):
                op = self.next().text
                left = Binary(op=op, left=left, right=self._parse_unary())
            else:
                return left

    def _parse_unary(self) -> Node:
        if self.at_op("-", "+"):
            op = self.next().text
            return Unary(op=op, operand=self._parse_unary())
        return self._parse_primary()

    def _parse_primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return Literal(kind="number", text=tok.text)
        if tok.kind == "string":
            self.next()
            return Literal(kind="string", text=tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            if self.at_kw("select", "with"):
                query = self.parse_query()
                self.expect_op(")")
                return ScalarSubquery(query=query)
            expr = self.parse_expr()
            self.expect_op(")")
            return expr
        if tok.kind in ("name", "qname"):
            word = tok.norm
            if tok.kind == "name":
                if word == "null":
                    self.next()
                    return Literal(kind="null", text=tok.text)
                if word in ("true", "false"):
                    self.next()
                    return Literal(kind="boolean", text=tok.text)
                if word in ("date", "time", "timestamp") and self.peek(1).kind == "string":
                    self.next()
                    value = self.next()
                    return Literal(kind="date", text=f"{word} {value.text}")
                if word == "interval" and self.peek(1).kind in ("string", "number"):
                    self.next()
                    value = self.next()
                    text = f"interval {value.text}"
                    unit = self.peek()
                    if unit.kind == "name" and unit.norm in _INTERVAL_UNITS:
                        self.next()
                        text = f"{text} {unit.norm}"
                    return Literal(kind="interval", text=text)
                if word == "case":
                    return self._parse_case()
                if word == "cast":
                    return self._parse_cast()
                if word == "exists":
                    self.next()
                    self.expect_op("(")
                    query = self.parse_query()
                    self.expect_op(")")
                    return Exists(query=query)
                if word in RESERVED_WORDS:
                    self.error("unexpected keyword")
                if word in _CURRENT_FUNCS and not (
                    self.peek(1).kind == "op" and self.peek(1).text == "("
                ):
                    self.next()
                    return FuncCall(name=word)
            self.next()
            if self.at_op("("):
                return self._parse_call(word)
            if self.at_op(".") and self.peek(1).kind != "end":
                self.next()
                nxt = self.peek()
                if nxt.kind == "op" and nxt.text == "*":
                    self.next()
                    return Star(table=word)
                column = self.expect_name("column name")
                return ColumnRef(table=word, name=column)
            return ColumnRef(table=None, name=word)
        self.error("expected an expression")

    def _parse_call(self, name: str) -> Node:
        self.expect_op("(")
        if self.take_op(")"):
            return self._maybe_over(FuncCall(name=name))
        if self.at_op("*"):
            self.next()
            self.expect_op(")")
            return self._maybe_over(FuncCall(name=name, star=True))
        distinct = bool(self.take_kw("distinct"))
        args = [self.parse_expr()]
        if name == "extract" and self.take_kw("from"):
            # EXTRACT(unit FROM expr): keep only the source expression.
            args = [self.parse_expr()]
        elif name == "substring" and self.take_kw("from"):
            # SUBSTRING(s FROM start [FOR length]) standard form
            args.append(self.parse_expr())
            if self.take_kw("for"):
                args.append(self.parse_expr())
        else:
            while self.take_op(","):
                args.append(self.parse_expr())
        self.expect_op(")")
        return self._maybe_over(FuncCall(name=name, args=args, distinct=distinct))

    def _maybe_over(self, call: FuncCall) -> FuncCall:
        # OVER is not reserved; it introduces a window only before "("
        if not (self.at_kw("over") and self.peek(1).kind == "op" and self.peek(1).text == "("):
            return call
        self.next()
        self.expect_op("(")
        window = Window()
        if self.take_kw("partition"):
            self.expect_kw("by")
            window.partition_by.append(self.parse_expr())
            while self.take_op(","):
                window.partition_by.append(self.parse_expr())
        if self.take_kw("order"):
            self.expect_kw("by")
            window.order_by.append(self._parse_order_item())
            while self.take_op(","):
                window.order_by.append(self._parse_order_item())
        if self.at_kw("rows", "range", "groups"):
            window.frame = self._parse_frame()
        self.expect_op(")")
        call.over = window
        return call

    def _parse_frame(self) -> str:
        parts = [self.next().norm]  # rows | range | groups
        if self.take_kw("between"):
            parts.append("between")
            parts.extend(self._parse_frame_bound())
            self.expect_kw("and")
            parts.append("and")
            parts.extend(self._parse_frame_bound())
        else:
            parts.extend(self._parse_frame_bound())
        return " ".join(parts)

    def _parse_frame_bound(self) -> list[str]:
        if self.take_kw("unbounded"):
            if self.take_kw("preceding") or self.take_kw("following"):
                return ["unbounded", self.tokens[self.i - 1].norm]
            self.error("expected PRECEDING or FOLLOWING after UNBOUNDED")
        if self.take_kw("current"):
            self.expect_kw("row")
            return ["current row"]
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            if self.take_kw("preceding") or self.take_kw("following"):
                return [tok.text, self.tokens[self.i - 1].norm]
        self.error("expected a window frame bound")

    def _parse_case(self) -> Node:
        self.expect_kw("case")
        operand = None
        if not self.at_kw("when"):
            operand = self.parse_expr()
        whens: list[tuple] = []
        while self.take_kw("when"):
            condition = self.parse_expr()
            self.expect_kw("then")
            whens.append((condition, self.parse_expr()))
        if not whens:
            self.error("CASE requires at least one WHEN branch")
        else_ = None
        if self.take_kw("else"):
            else_ = self.parse_expr()
        self.expect_kw("end")
        return Case(operand=operand, whens=whens, else_=else_)

    def _parse_cast(self) -> Node:
        self.expect_kw("cast")
        self.expect_op("(")
        expr = self.parse_expr()
        self.expect_kw("as")
        type_name = self.expect_name("type name")
        while self.peek().kind == "name" and self.peek().norm not in RESERVED_WORDS:
            type_name = f"{type_name} {self.next().norm}"
        if self.take_op("("):
            parts = []
            while not self.at_op(")"):
                parts.append(self.next().text)
                if self.take_op(","):
                    parts.append(",")
            self.expect_op(")")
            type_name = f"{type_name}({''.join(parts)})"
        self.expect_op(")")
        return Cast(expr=expr, type_name=type_name)


def parse_select(sql: str) -> Query:
    """Parse one SELECT (or WITH ... SELECT) statement into a syntax tree.

    Raises :class:`~sqlsynth.errors.SqlSyntaxError` on malformed input,
    including trailing garbage after the statement.
    """
    tokens = tokenize(sql)
    parser = _Parser(tokens)
    first = parser.peek()
    if not (first.kind == "name" and first.norm in ("select", "with")):
        parser.error("expected SELECT or WITH")
    return parser.parse_statement()


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

_PLACEHOLDERS = {"number": ":num", "string": ":str"}


def normalize_sql(sql: str, literal_placeholders: bool = True) -> str:
    """Canonical single-line form of ``sql`` used for deduplication and ids.

    Keywords and identifiers are lower-cased (quoted identifiers unwrapped),
    whitespace and comments collapse to single spaces, and, when
    ``literal_placeholders`` is on, number/string literals are replaced by
    typed placeholders so queries differing only in constants coincide.

    Falls back to lower-cased whitespace collapsing if the text cannot be
    tokenized at all (still usable as a dedup key for rejected candidates).
    """
    try:
        tokens = tokenize(sql)
    except SqlSyntaxError:
        return " ".join(sql.lower().split())
    parts: list[str] = []
    for tok in tokens:
        if tok.kind == "end":
            break
        if tok.kind == "op" and tok.text == ";":
            continue
        if literal_placeholders and tok.kind in _PLACEHOLDERS:
            parts.append(_PLACEHOLDERS[tok.kind])
        elif tok.kind == "number":
            parts.append(tok.text.lower())
        elif tok.kind == "string":
            parts.append(tok.text)
        else:
            parts.append(tok.norm)
    return " ".join(parts)
