import pytest

from algcirc.circuit import parse_circuit
from algcirc.field import QQ, prime_field

F7 = prime_field(7)
F101 = prime_field(101)

# -x^3 + x*y + y^2 - 1 with 7 operation gates and depth 6
SAMPLE_SEVEN = """\
field Q
var x y
x = input x
y = input y
m1 = const -1
nx = mul m1 x
a = mul nx x
b = add a y
c = mul b x
d = mul y y
e = add c d
out = add e m1
output out
"""


@pytest.fixture
def seven():
    return parse_circuit(SAMPLE_SEVEN)


@pytest.fixture(params=[QQ, F101], ids=["Q", "F101"])
def field(request):
    return request.param
