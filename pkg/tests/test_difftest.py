import random

import pytest

from src.llbc.core import parse_program
from src.llbc.main import _closed_entries, compare
from src.llbc.synthesis.translate import translate_program

from .support import ACCEPTED_FILES, load

UPDATE_TEMPLATE = """
fn update<'a>(x: &'a mut u32, y: u32) {{
    *x = copy *x {op} copy y;
    ret = ();
    return;
}}

fn pick<'a>(b: bool, x: &'a mut u32, y: &'a mut u32) -> &'a mut u32 {{
    if copy b {{
        ret = move x;
        return;
    }} else {{
        ret = move y;
        return;
    }}
}}

fn main() -> (u32, u32) {{
    locals {{ a: u32, c: u32, p: &'l mut u32, q: &'l mut u32, r: &'l mut u32, u: () }}
    a = {a}u32;
    c = {c}u32;
    p = &mut a;
    q = &mut c;
    r = pick({flag}, move p, move q);
    u = update(move r, {b}u32);
    ret = (move a, move c);
    return;
}}
"""


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_corpus_agrees_with_translation(name):
    program = load(name)
    pure = translate_program(program)
    for entry in _closed_entries(program):
        report = compare(program, pure, entry)
        assert report.verdict == "EQUAL", report


def test_panicking_entry_is_equal_to_failure():
    program = load("overflow.llbc")
    report = compare(program, translate_program(program), "test_underflow")
    assert report.verdict == "EQUAL"
    assert report.concrete == "Panic"
    assert report.pure == "Fail"


def test_out_of_fuel_is_inconclusive():
    program = load("list_nth.llbc")
    report = compare(program, translate_program(program), "test_nth", fuel=2)
    assert report.verdict == "INCONCLUSIVE"


def _random_case(rng: random.Random) -> str:
    return UPDATE_TEMPLATE.format(
        op=rng.choice(["+", "-", "*", "/", "%"]),
        a=rng.randint(0, 6),
        b=rng.randint(0, 6),
        c=rng.randint(0, 6),
        flag=rng.choice(["true", "false"]),
    )


@pytest.mark.parametrize("seed", range(100))
def test_random_programs_agree(seed):
    text = _random_case(random.Random(seed))
    program = parse_program(text)
    report = compare(program, translate_program(program), "main")
    assert report.verdict == "EQUAL", (text, report)


HELPERS = """
enum List<T> {
    Cons(T, Box<List<T>>),
    Nil,
}

fn list_nth_mut<'a, T>(l: &'a mut List<T>, i: u32) -> &'a mut T {
    locals { b: bool, i1: u32, tl: &'a mut List<T> }
    match *l {
        List::Cons => {
            b = copy i == 0u32;
            if move b {
                ret = &mut (*l).Cons.0;
                return;
            } else {
                i1 = copy i - 1u32;
                tl = &mut *(*l).Cons.1;
                ret = list_nth_mut::<T>(move tl, move i1);
                return;
            }
        },
        List::Nil => {
            panic;
        },
    }
}

fn sum<'a>(l: &'a List<u32>) -> u32 {
    locals { h: u32, tl: &'a List<u32>, s: u32 }
    match *l {
        List::Cons => {
            h = copy (*l).Cons.0;
            tl = &*(*l).Cons.1;
            s = sum(move tl);
            ret = copy h + copy s;
            return;
        },
        List::Nil => {
            ret = 0u32;
            return;
        },
    }
}

fn pick<'a>(b: bool, x: &'a mut u32, y: &'a mut u32) -> &'a mut u32 {
    if copy b {
        ret = move x;
        return;
    } else {
        ret = move y;
        return;
    }
}

fn nth_or<'a>(b: bool, l: &'a mut List<u32>, i: u32, y: &'a mut u32) -> &'a mut u32 {
    locals { x: &'a mut u32 }
    x = list_nth_mut::<u32>(move l, copy i);
    ret = pick(copy b, move x, move y);
    return;
}

fn add_to<'a>(x: &'a mut u32, n: u32) {
    *x = copy *x + copy n;
    ret = ();
    return;
}
"""


class ProgramBuilder:
    """Assembles a closed `main` out of randomly chosen steps over the helpers."""

    def __init__(self, rng: random.Random) -> None:
        self.rng = rng
        self.locals = ["acc: u32", "u: ()"]
        self.body = ["acc = 0u32;"]

    def small(self) -> str:
        return f"{self.rng.randint(0, 5)}u32"

    def flag(self) -> str:
        return self.rng.choice(["true", "false"])

    def reserved(self, k: int) -> None:
        self.locals += [f"x{k}: u32", f"r{k}: &'l mut u32", f"s{k}: &'m u32", f"n{k}: u32"]
        self.body += [
            f"x{k} = {self.small()};",
            f"r{k} = &reserved x{k};",
            f"s{k} = &x{k};",
            f"n{k} = copy *s{k};",
            f"u = add_to(move r{k}, move n{k});",
            f"acc = copy acc + copy x{k};",
        ]

    def boxed(self, k: int) -> None:
        op = self.rng.choice(["+", "-", "*", "/"])
        self.locals += [f"b{k}: Box<u32>", f"p{k}: &'l mut u32"]
        self.body += [
            f"b{k} = Box::new({self.small()});",
            f"p{k} = &mut *b{k};",
            f"*p{k} = copy *p{k} {op} {self.small()};",
            f"acc = copy acc + copy *b{k};",
            f"free(b{k});",
        ]

    def build_list(self, k: int) -> int:
        length = self.rng.randint(0, 3)
        self.locals += [f"l{k}: List<u32>", f"bl{k}: Box<List<u32>>", f"sl{k}: &'s List<u32>", f"t{k}: u32"]
        self.body.append(f"l{k} = List::Nil;")
        for _ in range(length):
            self.body += [f"bl{k} = Box::new(move l{k});", f"l{k} = List::Cons({self.small()}, move bl{k});"]
        return length

    def read_list(self, k: int) -> None:
        self.body += [f"sl{k} = &l{k};", f"t{k} = sum(move sl{k});", f"acc = copy acc + copy t{k};"]

    def index(self, length: int) -> str:
        # One past the end now and then, so the out-of-bounds panic is covered.
        return f"{self.rng.randint(0, length)}u32"

    def nth(self, k: int) -> None:
        length = self.build_list(k)
        self.locals += [f"pl{k}: &'l mut List<u32>", f"x{k}: &'l mut u32"]
        self.body += [
            f"pl{k} = &mut l{k};",
            f"x{k} = list_nth_mut::<u32>(move pl{k}, {self.index(length)});",
            f"*x{k} = copy *x{k} + {self.small()};",
        ]
        self.read_list(k)

    def nested(self, k: int) -> None:
        length = self.build_list(k)
        self.locals += [
            f"c{k}: u32", f"pl{k}: &'l mut List<u32>", f"x{k}: &'l mut u32",
            f"q{k}: &'l mut u32", f"r{k}: &'l mut u32",
        ]
        self.body += [f"c{k} = {self.small()};", f"pl{k} = &mut l{k};", f"q{k} = &mut c{k};"]
        if self.rng.random() < 0.5:
            self.body += [
                f"x{k} = list_nth_mut::<u32>(move pl{k}, {self.index(length)});",
                f"r{k} = pick({self.flag()}, move x{k}, move q{k});",
            ]
        else:
            self.body.append(f"r{k} = nth_or({self.flag()}, move pl{k}, {self.index(length)}, move q{k});")
        self.body.append(f"*r{k} = copy *r{k} + {self.small()};")
        self.read_list(k)
        self.body.append(f"acc = copy acc + copy c{k};")

    def program(self) -> str:
        steps = [self.reserved, self.boxed, self.nth, self.nested]
        for k in range(self.rng.randint(1, 4)):
            self.rng.choice(steps)(k)
        locals_ = ",\n        ".join(self.locals)
        body = "\n    ".join(self.body + ["ret = copy acc;", "return;"])
        return f"{HELPERS}\nfn main() -> u32 {{\n    locals {{\n        {locals_}\n    }}\n    {body}\n}}\n"


@pytest.mark.parametrize("seed", range(100))
def test_random_borrowing_programs_agree(seed):
    text = ProgramBuilder(random.Random(seed)).program()
    program = parse_program(text)
    report = compare(program, translate_program(program), "main")
    assert report.verdict == "EQUAL", (text, report)


def test_random_programs_cover_every_step():
    texts = [ProgramBuilder(random.Random(seed)).program() for seed in range(100)]
    for marker in ("&reserved", "Box::new(", "list_nth_mut::<u32>(move pl", "pick(", "nth_or("):
        assert any(marker in t.split("fn main")[1] for t in texts), marker
