"""Lexer, parser and dataflow front end for the tuning mini-language.

Grammar (statements end with ';', loop/branch bodies are brace-delimited):

    prog  := (decl | stmt)*
    decl  := "input" ID "in" "[" NUM "," NUM "]" ";"
    stmt  := ID "=" expr ";"
           | "while" "(" cond ")" "{" stmt* "}" [";"]
           | "if" "(" cond ")" "{" stmt* "}" ["else" "{" stmt* "}"]
           | "require_nsb" "(" ID "," INT ")" ";"
    expr  := expr ("+"|"-") term | term
    term  := term ("*"|"/") factor | factor
    factor:= NUM | ID | "(" expr ")" | ("sqrt"|"sin"|"cos"|"atan") "(" expr ")"
    cond  := expr ("<"|">"|"<="|">="|"==") expr

Every value-carrying site (constant, variable occurrence, operator result,
assignment target) receives a unique integer label, assigned pre-order over
the statement list so that ids are contiguous 0..n-1 and deterministic.
Condition expressions are deliberately left unlabeled: conditions are not
tuned and their sub-expressions never enter the constraint system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

from .errors import DuplicateRequire, SyntaxError, UseBeforeDef

UNARY_FUNS = ("sqrt", "sin", "cos", "atan")
KEYWORDS = ("input", "in", "while", "if", "else", "require_nsb") + UNARY_FUNS


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass
class Const:
    text: str            # literal as written, value is taken from the text
    label: Optional[int] = None


@dataclass
class Var:
    name: str
    label: Optional[int] = None


@dataclass
class BinOp:
    op: str              # one of + - * /
    lhs: "Expr"
    rhs: "Expr"
    label: Optional[int] = None


@dataclass
class UnFun:
    fun: str             # one of sqrt sin cos atan
    arg: "Expr"
    label: Optional[int] = None


Expr = Union[Const, Var, BinOp, UnFun]


@dataclass
class Cond:
    op: str              # < > <= >= ==
    lhs: Expr            # unlabeled subtrees
    rhs: Expr


@dataclass
class Assign:
    var: str
    rhs: Expr
    label: Optional[int] = None   # definition label


@dataclass
class InputDecl:
    var: str
    lo: str
    hi: str
    label: Optional[int] = None   # definition label


@dataclass
class While:
    cond: Cond
    body: List["Stmt"]
    label: Optional[int] = None


@dataclass
class If:
    cond: Cond
    then: List["Stmt"]
    orelse: List["Stmt"]
    label: Optional[int] = None


@dataclass
class Require:
    var: str
    nsb: int
    label: Optional[int] = None


Stmt = Union[Assign, InputDecl, While, If, Require]


@dataclass
class LabeledProgram:
    body: List[Stmt]
    n_labels: int = 0

    def inputs(self) -> List[InputDecl]:
        return [s for s in self.body if isinstance(s, InputDecl)]

    def requires(self) -> List[Require]:
        out: List[Require] = []
        _walk_stmts(self.body, lambda s: out.append(s) if isinstance(s, Require) else None)
        return out


def _walk_stmts(body, fn):
    for s in body:
        fn(s)
        if isinstance(s, While):
            _walk_stmts(s.body, fn)
        elif isinstance(s, If):
            _walk_stmts(s.then, fn)
            _walk_stmts(s.orelse, fn)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass
class _Tok:
    kind: str    # ID NUM op punct kw EOF
    text: str
    line: int
    col: int


_PUNCT2 = ("<=", ">=", "==")
_PUNCT1 = "+-*/=<>(){}[],;"


def _lex(src: str) -> List[_Tok]:
    toks: List[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_col = col
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                if src[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            toks.append(_Tok("NUM", text, line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            toks.append(_Tok("kw" if text in KEYWORDS else "ID", text, line, start_col))
            col += j - i
            i = j
            continue
        if src[i:i + 2] in _PUNCT2:
            toks.append(_Tok("punct", src[i:i + 2], line, start_col))
            i += 2
            col += 2
            continue
        if c in _PUNCT1:
            toks.append(_Tok("punct", c, line, start_col))
            i += 1
            col += 1
            continue
        raise SyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "EOF":
            raise SyntaxError(f"expected {text!r}, found {t.text!r or 'end of input'}", t.line, t.col)
        return self.next()

    def expect_id(self) -> _Tok:
        t = self.peek()
        if t.kind != "ID":
            raise SyntaxError(f"expected identifier, found {t.text!r or 'end of input'}", t.line, t.col)
        return self.next()

    def parse_program(self) -> List[Stmt]:
        body: List[Stmt] = []
        while self.peek().kind != "EOF":
            body.append(self.parse_stmt())
        return body

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if t.text == "input":
            self.next()
            name = self.expect_id().text
            self.expect("in")
            self.expect("[")
            lo = self.parse_signed_num()
            self.expect(",")
            hi = self.parse_signed_num()
            self.expect("]")
            self.expect(";")
            return InputDecl(name, lo, hi)
        if t.text == "while":
            self.next()
            self.expect("(")
            cond = self.parse_cond()
            self.expect(")")
            body = self.parse_block()
            if self.peek().text == ";":
                self.next()
            return While(cond, body)
        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self.parse_cond()
            self.expect(")")
            then = self.parse_block()
            orelse: List[Stmt] = []
            if self.peek().text == "else":
                self.next()
                orelse = self.parse_block()
            return If(cond, then, orelse)
        if t.text == "require_nsb":
            self.next()
            self.expect("(")
            name = self.expect_id().text
            self.expect(",")
            num = self.peek()
            if num.kind != "NUM" or not num.text.isdigit() or int(num.text) < 1:
                raise SyntaxError("require_nsb needs a positive integer bit count", num.line, num.col)
            self.next()
            self.expect(")")
            self.expect(";")
            return Require(name, int(num.text))
        if t.kind == "ID":
            name = self.next().text
            self.expect("=")
            rhs = self.parse_expr()
            self.expect(";")
            return Assign(name, rhs)
        raise SyntaxError(f"expected a statement, found {t.text!r or 'end of input'}", t.line, t.col)

    def parse_signed_num(self) -> str:
        # Interval bounds may carry a sign; expressions may not (no unary minus).
        sign = ""
        if self.peek().text == "-":
            self.next()
            sign = "-"
        t = self.peek()
        if t.kind != "NUM":
            raise SyntaxError(f"expected a number, found {t.text!r}", t.line, t.col)
        self.next()
        return sign + t.text

    def parse_block(self) -> List[Stmt]:
        self.expect("{")
        body: List[Stmt] = []
        while self.peek().text != "}":
            if self.peek().kind == "EOF":
                t = self.peek()
                raise SyntaxError("unterminated block", t.line, t.col)
            body.append(self.parse_stmt())
        self.expect("}")
        return body

    def parse_cond(self) -> Cond:
        lhs = self.parse_expr()
        t = self.peek()
        if t.text not in ("<", ">", "<=", ">=", "=="):
            raise SyntaxError(f"expected a comparison operator, found {t.text!r}", t.line, t.col)
        self.next()
        rhs = self.parse_expr()
        return Cond(t.text, lhs, rhs)

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        t = self.peek()
        if t.kind == "NUM":
            self.next()
            return Const(t.text)
        if t.text in UNARY_FUNS:
            self.next()
            self.expect("(")
            arg = self.parse_expr()
            self.expect(")")
            return UnFun(t.text, arg)
        if t.kind == "ID":
            self.next()
            return Var(t.text)
        if t.text == "(":
            self.next()
            node = self.parse_expr()
            self.expect(")")
            return node
        raise SyntaxError(f"expected an expression, found {t.text!r or 'end of input'}", t.line, t.col)


# ---------------------------------------------------------------------------
# Labeling
# ---------------------------------------------------------------------------

class _Labeler:
    def __init__(self):
        self.counter = 0

    def fresh(self) -> int:
        n = self.counter
        self.counter += 1
        return n

    def label_expr(self, e: Expr):
        e.label = self.fresh()
        if isinstance(e, BinOp):
            self.label_expr(e.lhs)
            self.label_expr(e.rhs)
        elif isinstance(e, UnFun):
            self.label_expr(e.arg)

    def label_stmts(self, body: List[Stmt]):
        for s in body:
            s.label = self.fresh()
            if isinstance(s, Assign):
                self.label_expr(s.rhs)
            elif isinstance(s, While):
                self.label_stmts(s.body)
            elif isinstance(s, If):
                self.label_stmts(s.then)
                self.label_stmts(s.orelse)


def parse(source: str) -> LabeledProgram:
    """Parse and label a program.

    Labels are assigned pre-order (statement before its right-hand side,
    operators before their operands) and are contiguous from 0. Raises
    SyntaxError with position info on malformed input and DuplicateRequire
    if two directives target one variable.
    """
    body = _Parser(_lex(source)).parse_program()
    labeler = _Labeler()
    labeler.label_stmts(body)
    prog = LabeledProgram(body, labeler.counter)
    seen: Set[str] = set()
    for r in prog.requires():
        if r.var in seen:
            raise DuplicateRequire(r.var)
        seen.add(r.var)
    return prog


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _fmt_expr(e: Expr, ann=None, parent_prec=0) -> str:
    if isinstance(e, Const):
        return e.text + _ann(e.label, ann)
    if isinstance(e, Var):
        return e.name + _ann(e.label, ann)
    if isinstance(e, UnFun):
        return f"{e.fun}({_fmt_expr(e.arg, ann)})" + _ann(e.label, ann)
    prec = 1 if e.op in "+-" else 2
    lhs = _fmt_expr(e.lhs, ann, prec)
    rhs = _fmt_expr(e.rhs, ann, prec + 1)
    text = f"{lhs} {e.op}{_ann(e.label, ann)} {rhs}"
    if prec < parent_prec:
        return f"({text})"
    return text


def _ann(label, ann) -> str:
    if ann is None or label is None:
        return ""
    return f"|{ann(label)}|"


def _fmt_cond(c: Cond) -> str:
    return f"{_fmt_expr(c.lhs)} {c.op} {_fmt_expr(c.rhs)}"


def print_program(prog: LabeledProgram, annotate=None, indent: str = "") -> str:
    """Render a program back to source. With annotate (a label -> value
    callable), every labeled site is suffixed |value|."""
    return _fmt_stmts(prog.body, annotate, indent)


def _fmt_stmts(body: List[Stmt], ann, indent: str) -> str:
    lines = []
    for s in body:
        if isinstance(s, Assign):
            lines.append(f"{indent}{s.var}{_ann(s.label, ann)} = {_fmt_expr(s.rhs, ann)};")
        elif isinstance(s, InputDecl):
            lines.append(f"{indent}input {s.var}{_ann(s.label, ann)} in [{s.lo}, {s.hi}];")
        elif isinstance(s, While):
            lines.append(f"{indent}while ({_fmt_cond(s.cond)}) {{")
            lines.append(_fmt_stmts(s.body, ann, indent + "  "))
            lines.append(f"{indent}}};")
        elif isinstance(s, If):
            lines.append(f"{indent}if ({_fmt_cond(s.cond)}) {{")
            lines.append(_fmt_stmts(s.then, ann, indent + "  "))
            if s.orelse:
                lines.append(f"{indent}}} else {{")
                lines.append(_fmt_stmts(s.orelse, ann, indent + "  "))
            lines.append(f"{indent}}}")
        elif isinstance(s, Require):
            lines.append(f"{indent}require_nsb({s.var}, {s.nsb});")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Reaching definitions
# ---------------------------------------------------------------------------

@dataclass
class DefUseMap:
    use_defs: Dict[int, FrozenSet[int]] = field(default_factory=dict)
    occurrences: Dict[str, FrozenSet[int]] = field(default_factory=dict)
    require_defs: Dict[int, FrozenSet[int]] = field(default_factory=dict)
    def_var: Dict[int, str] = field(default_factory=dict)
    use_var: Dict[int, str] = field(default_factory=dict)


class _DefState:
    """Abstract environment: variable -> set of reaching definition labels."""

    def __init__(self):
        self.env: Dict[str, Set[int]] = {}

    def copy(self) -> "_DefState":
        s = _DefState()
        s.env = {k: set(v) for k, v in self.env.items()}
        return s

    def merge(self, other: "_DefState") -> bool:
        changed = False
        for k, v in other.env.items():
            cur = self.env.setdefault(k, set())
            before = len(cur)
            cur |= v
            changed = changed or len(cur) != before
        return changed


def resolve_defs(prog: LabeledProgram) -> DefUseMap:
    """Compute reaching definitions over the structured control flow.

    Loop bodies are iterated to a fixpoint so a use inside a loop sees both
    the pre-loop definition and any in-loop redefinition; branches of an if
    join. Raises UseBeforeDef when a read has no reaching definition.
    """
    out = DefUseMap()
    occ: Dict[str, Set[int]] = {}

    def record_occurrence(name: str, label: Optional[int]):
        if label is not None:
            occ.setdefault(name, set()).add(label)

    def visit_expr(e: Expr, state: _DefState, labeled: bool):
        if isinstance(e, Const):
            return
        if isinstance(e, Var):
            defs = state.env.get(e.name)
            if not defs:
                raise UseBeforeDef(e.name, e.label)
            if labeled:
                record_occurrence(e.name, e.label)
                out.use_defs[e.label] = frozenset(defs)
                out.use_var[e.label] = e.name
            return
        if isinstance(e, BinOp):
            visit_expr(e.lhs, state, labeled)
            visit_expr(e.rhs, state, labeled)
            return
        visit_expr(e.arg, state, labeled)

    def visit_block(body: List[Stmt], state: _DefState) -> _DefState:
        for s in body:
            if isinstance(s, Assign):
                visit_expr(s.rhs, state, True)
                state.env[s.var] = {s.label}
                record_occurrence(s.var, s.label)
                out.def_var[s.label] = s.var
            elif isinstance(s, InputDecl):
                state.env[s.var] = {s.label}
                record_occurrence(s.var, s.label)
                out.def_var[s.label] = s.var
            elif isinstance(s, While):
                # Fixpoint over the loop body; condition reads are checked
                # but condition subtrees stay out of the occurrence sets.
                visit_expr(s.cond.lhs, state, False)
                visit_expr(s.cond.rhs, state, False)
                while True:
                    after = visit_block(s.body, state.copy())
                    if not state.merge(after):
                        break
                visit_expr(s.cond.lhs, state, False)
                visit_expr(s.cond.rhs, state, False)
            elif isinstance(s, If):
                visit_expr(s.cond.lhs, state, False)
                visit_expr(s.cond.rhs, state, False)
                t = visit_block(s.then, state.copy())
                e = visit_block(s.orelse, state.copy())
                t.merge(e)
                state = t
            elif isinstance(s, Require):
                defs = state.env.get(s.var)
                if not defs:
                    raise UseBeforeDef(s.var, s.label)
                out.require_defs[s.label] = frozenset(defs)
        return state

    visit_block(prog.body, _DefState())
    out.occurrences = {k: frozenset(v) for k, v in occ.items()}
    out.use_defs = dict(out.use_defs)
    return out


def all_labels_by_kind(prog: LabeledProgram):
    """Classify every label: 'const', 'use', 'def', 'op', 'fun', 'stmt'."""
    kinds: Dict[int, str] = {}
    names: Dict[int, Optional[str]] = {}

    def expr(e: Expr):
        if isinstance(e, Const):
            kinds[e.label] = "const"
            names[e.label] = None
        elif isinstance(e, Var):
            kinds[e.label] = "use"
            names[e.label] = e.name
        elif isinstance(e, BinOp):
            kinds[e.label] = "op"
            names[e.label] = e.op
            expr(e.lhs)
            expr(e.rhs)
        else:
            kinds[e.label] = "fun"
            names[e.label] = e.fun
            expr(e.arg)

    def stmt(s: Stmt):
        if isinstance(s, (Assign, InputDecl)):
            kinds[s.label] = "def"
            names[s.label] = s.var
            if isinstance(s, Assign):
                expr(s.rhs)
        else:
            kinds[s.label] = "stmt"
            names[s.label] = None

    _walk_stmts(prog.body, stmt)
    return kinds, names
