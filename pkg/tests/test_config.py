import pytest

from artifact.config import SUITES, ConfigError, load, loads

GOOD = """
[model]
kind = group
group = S3

[run]
suite = crossed, galois
seed = 4
"""


def test_round_trip_is_hash_equal():
    cfg = loads(GOOD)
    again = loads(cfg.dumps())
    assert again.hash() == cfg.hash()
    assert again.dumps() == cfg.dumps()


def test_formatting_does_not_change_the_hash():
    reordered = "[run]\nseed=4\nsuite = crossed, galois\n[model]\ngroup=S3\nkind=group\n"
    assert loads(reordered).hash() == loads(GOOD).hash()


def test_suites_keep_declared_order():
    assert loads(GOOD).suites == ["crossed", "galois"]
    assert loads("[model]\nkind = group\ngroup = Z2\n").suites == list(SUITES)
    assert loads("[model]\nkind = group\ngroup = Z2\n[run]\nsuite = none\n").suites == []


@pytest.mark.parametrize("text,field", [
    ("kind = group\n", "document"),
    ("[model]\nkind = group\nkind = cuntz\n", "model.kind"),
    ("[model]\nkind = torus\n", "model.kind"),
    ("[model]\nkind = group\ngroup = S3\n[run]\nwindow = -1\n", "run.window"),
    ("[model]\nkind = group\ngroup = S3\n[run]\ntol = zero\n", "run.tol"),
    ("[model]\nkind = group\ngroup = S3\n[extras]\nx = 1\n", "extras"),
    ("[model]\nkind = group\ngroup = S3\n[run]\nsuite = bogus\n", "run.suite"),
])
def test_malformed_configs_name_the_field(text, field):
    with pytest.raises(ConfigError) as err:
        loads(text).validate()
    assert err.value.field == field


def test_duplicate_key_reports_line():
    with pytest.raises(ConfigError) as err:
        loads("[model]\nkind = group\nkind = cuntz\n")
    assert err.value.line == 3


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "absent.ini")
