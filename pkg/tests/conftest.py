import pytest

from resurgent_pi.exact_coeffs import exact_coeffs


@pytest.fixture(scope="session")
def table():
    return exact_coeffs.build_table(120)


@pytest.fixture(scope="session")
def cache_file(tmp_path_factory, table):
    path = tmp_path_factory.mktemp("cache") / "coeffs.txt"
    exact_coeffs.save_table(table, str(path))
    return str(path)


@pytest.fixture(scope="session")
def processor(cache_file):
    from resurgent_pi import ResurgentPI
    return ResurgentPI(max_n=120, cache=cache_file)
