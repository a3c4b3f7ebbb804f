import pytest

from corrdyn import DiffOperator, FamilySpec, UniPoly, parse_operator, parse_w_poly


def family_from_texts(r0: str, parts: list[str], beta: list[complex]) -> FamilySpec:
    return FamilySpec(
        parse_w_poly(r0),
        tuple(parse_w_poly(p) for p in parts),
        tuple(complex(b) for b in beta),
    )


def constant_family(r0: str = "w^2 - 1") -> FamilySpec:
    p = parse_w_poly(r0)
    d = int(p.degree)
    return FamilySpec(p, (UniPoly.zero(),) * (d + 1), (0j,) * (d + 1))


@pytest.fixture(scope="session")
def main_operator() -> DiffOperator:
    """Order-two operator used throughout: (w^2-1)*D^2 + D."""
    return parse_operator("(w^2-1)*D^2 + D")


@pytest.fixture(scope="session")
def main_family_100(main_operator):
    """The degree-100 family induced by the main operator."""
    from corrdyn import build_Tn

    return build_Tn(main_operator, 100).family


@pytest.fixture(scope="session")
def main_cert_100(main_family_100):
    from corrdyn import certify

    cert = certify(main_family_100)
    assert cert.passed
    return cert
