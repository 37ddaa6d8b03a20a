import json

import pytest

from btlab.verify import (
    RECHECKS,
    Certificate,
    CertificateError,
    b_closed,
    c_closed,
    cert_coker_g0,
    cert_crt_and_diagram,
    cert_g0_global,
    cert_iwahori,
    cert_pstar_j,
    cert_sigma_closed_forms,
    crt_bijective,
    load_certificate,
    psi_closed_form,
    sigma_closed_form_g0,
    sigma_closed_form_iwahori,
)

from conftest import tree_q


def roundtrip(cert):
    assert cert.passed, cert.payload
    again = load_certificate(cert.dumps())
    assert again.to_json() == cert.to_json()
    return again


def test_sigma_closed_form_examples():
    assert sigma_closed_form_g0(2, 1) == [[3, 0], [1, 2]]
    assert sigma_closed_form_g0(2, 2) == [[3, 0, 0], [1, 2, 0], [0, 1, 2]]
    assert sigma_closed_form_iwahori(3, 0) == [[3, 1, 0], [0, 1, 3]]
    assert sigma_closed_form_iwahori(2, 0) == [[2, 1, 0], [0, 1, 2]]
    assert psi_closed_form(2, 0) == [-1, 2, -1]
    assert psi_closed_form(3, 1) == [1, -3, 9, -3, 1]


@pytest.mark.parametrize("q,n", [(2, 1), (3, 0), (2, 2), (4, 1)])
def test_cert_sigma(q, n):
    cert = roundtrip(cert_sigma_closed_forms(tree_q(q), n))
    assert cert.payload["g0"]["computed"] == sigma_closed_form_g0(q, n)
    assert cert.payload["iwahori"]["computed"] == sigma_closed_form_iwahori(q, n)


@pytest.mark.parametrize("q,n,factor", [(2, 1, 6), (3, 2, 36), (5, 0, 6), (2, 3, 24)])
def test_cert_coker(q, n, factor):
    cert = roundtrip(cert_coker_g0(tree_q(q), n))
    assert cert.payload["invariant_factors"] == [1] * n + [factor]
    assert cert.payload["class_order_v0"] == factor


@pytest.mark.parametrize("q,n", [(2, 0), (3, 1), (2, 1), (2, 2), (2, 3)])
def test_cert_iwahori(q, n):
    cert = roundtrip(cert_iwahori(tree_q(q), n))
    p = cert.payload
    assert p["psi"] == psi_closed_form(q, n)
    assert p["cokernel"] == {"torsion": [q ** (n + 1)], "free_rank": 0}
    assert p["s_image"] == [-x for x in p["psi"]]
    assert p["kernel"] in ([p["psi"]], [[-x for x in p["psi"]]])


@pytest.mark.parametrize("q", [2, 3])
def test_cert_g0_global(q):
    cert = roundtrip(cert_g0_global(tree_q(q)))
    assert cert.payload["cokernel"] == {"torsion": [q + 1], "free_rank": 1}
    S = cert.payload["s_matrix"]
    square = [[sum(S[i][k] * S[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert square == [[1, 0], [0, 1]]


def test_cert_crt_examples():
    p = roundtrip(cert_crt_and_diagram(tree_q(3), 2)).payload
    level = p["levels"][0]
    assert level["modulus"] == 36 and level["b"] == 13 and level["c"] == 32
    assert p["crt_b"] == [4, 1]
    p0 = roundtrip(cert_crt_and_diagram(tree_q(2), 0)).payload
    assert p0["levels"][0]["b"] % 3 == 1 and p0["levels"][0]["c"] % 3 == 0


def test_b_c_closed_forms():
    assert b_closed(3, 2) == 13 and c_closed(3, 2) == -4
    assert b_closed(2, 0) == 1 and c_closed(2, 0) == 0  # empty sum
    for q in (2, 3, 5):
        assert b_closed(q, 0) % (q + 1) == 1 and c_closed(q, 0) % (q + 1) == 0


def test_crt_helper():
    info = crt_bijective(9, 4)
    assert info["gcd"] == 1 and info["scan"] is True
    u, v = info["bezout"]
    assert 9 * u + 4 * v == 1


@pytest.mark.parametrize("q,n,order,cls", [(2, 1, 6, 1), (3, 0, 4, 1)])
def test_cert_pstar(q, n, order, cls):
    p = roundtrip(cert_pstar_j(tree_q(q), n)).payload
    assert p["class_order"] == order and p["class_phi"] == cls and p["class_psi"] == cls
    assert p["s_on_torsion"] == -1


def test_tampering_is_detected():
    cert = cert_coker_g0(tree_q(2), 1)
    text = cert.dumps()
    data = json.loads(text)
    data["payload"]["invariant_factors"] = [1, 7]
    with pytest.raises(CertificateError, match="checksum"):
        load_certificate(data)
    forged = Certificate(**{k: data[k] for k in ("name", "anchor", "config", "status", "payload")})
    with pytest.raises(CertificateError, match="does not support"):
        load_certificate(forged.dumps())
    flipped = Certificate(cert.name, cert.anchor, cert.config, "fail", cert.payload)
    with pytest.raises(CertificateError):
        load_certificate(flipped.dumps())
    # one changed byte anywhere breaks the checksum
    i = text.index('"status"')
    with pytest.raises((CertificateError, json.JSONDecodeError)):
        load_certificate(text[:i] + text[i:].replace("pass", "pasS", 1))


def test_malformed_certificates():
    with pytest.raises(CertificateError):
        load_certificate({"name": "coker_g0"})
    bogus = Certificate("nope", "", {}, "pass", {})
    with pytest.raises(CertificateError):
        load_certificate(bogus.dumps())
    assert set(RECHECKS) == {"sigma_closed_forms", "coker_g0", "iwahori", "g0_global", "crt_and_diagram", "pstar_j"}


def test_certificates_are_deterministic():
    t = tree_q(3)
    assert cert_pstar_j(t, 1, seed=4).dumps() == cert_pstar_j(tree_q(3), 1, seed=4).dumps()
    assert cert_iwahori(t, 1).checksum == cert_iwahori(t, 1).checksum


def test_laurent_backend_certificates():
    t = tree_q(4)
    assert cert_coker_g0(t, 1).payload["invariant_factors"] == [1, 20]
    roundtrip(cert_iwahori(tree_q(2, "laurent"), 1))
