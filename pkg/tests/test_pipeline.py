import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from hqreg.exceptions import ContractError, SchemaError
from hqreg.pipeline import (
    CsvSchema,
    PrincipalComponents,
    Standardizer,
    TabularDataset,
    correlation_matrix,
    load_csv,
    load_housing,
    load_table,
    train_test_split,
)


@pytest.fixture(scope="module")
def housing():
    return load_housing()


def write(tmp_path, text, name="table.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_bundled_housing_shape_and_values(housing):
    assert housing.features.shape == (506, 13)
    assert housing.targets.shape == (506,)
    assert housing.feature_names == (
        "crim", "zn", "indus", "chas", "nox", "rm", "age",
        "dis", "rad", "tax", "ptratio", "b", "lstat",
    )
    assert housing.target_name == "medv"
    np.testing.assert_allclose(housing.features[0, :3], [0.00632, 18.0, 2.31])
    assert housing.targets[0] == 24.0
    assert housing.targets.mean() == pytest.approx(22.5328, abs=1e-3)
    assert (housing.targets == 50.0).sum() == 16


def test_load_csv_missing_column(tmp_path):
    path = write(tmp_path, "a,b\n1,2\n")
    with pytest.raises(SchemaError, match="'c'"):
        load_csv(path, CsvSchema(("a", "c")))


def test_load_csv_malformed_cell(tmp_path):
    path = write(tmp_path, "a,b\n1,2\n3,oops\n")
    with pytest.raises(SchemaError, match=r"row 2.*'b'"):
        load_csv(path, CsvSchema(("a", "b")))


def test_load_csv_ragged_row(tmp_path):
    path = write(tmp_path, "a,b\n1,2\n3\n")
    with pytest.raises(SchemaError, match="row 2"):
        load_csv(path, CsvSchema(("a", "b")))


def test_load_csv_row_count_mismatch_warns(tmp_path):
    path = write(tmp_path, "a,b\n1,2\n3,4\n")
    with pytest.warns(UserWarning, match="expected 5"):
        ds = load_csv(path, CsvSchema(("a", "b"), expected_rows=5))
    assert ds.n_rows == 2


def test_load_csv_missing_and_empty_files(tmp_path):
    with pytest.raises(SchemaError, match="not found"):
        load_csv(tmp_path / "nope.csv", CsvSchema(("a",)))
    empty = write(tmp_path, "", name="empty.csv")
    with pytest.raises(SchemaError, match="empty"):
        load_csv(empty, CsvSchema(("a",)))
    header_only = write(tmp_path, "a,b\n", name="header.csv")
    with pytest.raises(SchemaError, match="no data rows"):
        load_csv(header_only, CsvSchema(("a", "b")))


def test_load_csv_selects_columns_by_name(tmp_path):
    path = write(tmp_path, "b,extra,a\n2,9,1\n4,9,3\n")
    ds = load_csv(path, CsvSchema(("a", "b"), target="b"))
    np.testing.assert_array_equal(ds.features[:, 0], [1.0, 3.0])
    np.testing.assert_array_equal(ds.targets, [2.0, 4.0])


def test_load_table_uses_file_header(tmp_path):
    path = write(tmp_path, "p,q,medv\n1,2,3\n4,5,6\n")
    ds = load_table(path, target="medv")
    assert ds.feature_names == ("p", "q")
    np.testing.assert_array_equal(ds.targets, [3.0, 6.0])
    with pytest.raises(SchemaError, match="'medv'"):
        load_table(write(tmp_path, "p,q\n1,2\n", name="n.csv"), target="medv")


def test_standardizer_golden_column():
    X = np.array([[1.0], [2.0], [3.0]])
    out = Standardizer().fit_transform(X)
    root = np.sqrt(1.5)
    np.testing.assert_allclose(out[:, 0], [-root, 0.0, root], atol=1e-12)


def test_standardizer_population_convention(housing):
    scaler = Standardizer().fit(housing.features)
    np.testing.assert_allclose(scaler.scale_, housing.features.std(axis=0, ddof=0), atol=1e-12)
    transformed = scaler.transform(housing.features)
    np.testing.assert_allclose(transformed.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(transformed.std(axis=0), 1.0, atol=1e-10)


def test_standardizer_train_statistics_apply_to_test():
    train = np.array([[0.0], [2.0]])
    test = np.array([[4.0]])
    scaler = Standardizer().fit(train)
    np.testing.assert_allclose(scaler.transform(test), [[3.0]])


def test_standardizer_errors():
    with pytest.raises(ContractError, match="column 1"):
        Standardizer().fit(np.array([[1.0, 5.0], [2.0, 5.0]]))
    with pytest.raises(ContractError, match=r"1 \(b\)"):
        Standardizer(feature_names=("a", "b")).fit(np.array([[1.0, 5.0], [2.0, 5.0]]))
    with pytest.raises(NotFittedError):
        Standardizer().transform(np.ones((2, 2)))
    scaler = Standardizer().fit(np.array([[1.0], [2.0]]))
    with pytest.raises(ContractError, match="expected 1"):
        scaler.transform(np.ones((2, 3)))
    with pytest.raises(ContractError, match="finite"):
        Standardizer().fit(np.array([[1.0], [np.nan]]))


def test_standardizer_inverse_round_trip(housing):
    scaler = Standardizer().fit(housing.features)
    out = scaler.inverse_transform(scaler.transform(housing.features))
    np.testing.assert_allclose(out, housing.features, atol=1e-9)


def test_pca_matches_covariance_eigendecomposition(housing):
    Z = Standardizer().fit_transform(housing.features)
    pca = PrincipalComponents(13).fit(Z)
    cov = np.cov(Z, rowvar=False, ddof=0)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    np.testing.assert_allclose(
        pca.full_variance_ratio_, eigvals / eigvals.sum(), atol=1e-8
    )
    for i in range(13):
        overlap = abs(np.dot(pca.components_[i], eigvecs[:, order[i]]))
        assert overlap == pytest.approx(1.0, abs=1e-8)


def test_pca_components_orthonormal(housing):
    Z = Standardizer().fit_transform(housing.features)
    pca = PrincipalComponents(9).fit(Z)
    gram = pca.components_ @ pca.components_.T
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-9)


def test_pca_sign_convention_and_determinism(housing):
    Z = Standardizer().fit_transform(housing.features)
    a = PrincipalComponents(9).fit(Z)
    b = PrincipalComponents(9).fit(Z)
    np.testing.assert_array_equal(a.components_, b.components_)
    for row in a.components_:
        assert row[np.argmax(np.abs(row))] > 0.0


def test_pca_transform_decorrelates(housing):
    Z = Standardizer().fit_transform(housing.features)
    T = PrincipalComponents(9).fit(Z).transform(Z)
    corr = np.corrcoef(T, rowvar=False)
    off = corr - np.diag(np.diag(corr))
    assert np.max(np.abs(off)) < 1e-6


def test_pca_reconstruction_error_identity(housing):
    Z = Standardizer().fit_transform(housing.features)
    for k in (3, 9):
        pca = PrincipalComponents(k).fit(Z)
        recon = pca.inverse_transform(pca.transform(Z))
        err = np.sum((Z - recon) ** 2) / Z.shape[0]
        expected = (1.0 - pca.cumulative_ratio_[-1]) * pca.total_variance_
        assert err == pytest.approx(expected, rel=1e-6)


def test_pca_housing_variance_milestones(housing):
    Z = Standardizer().fit_transform(housing.features)
    pca = PrincipalComponents(13).fit(Z)
    cumulative = np.cumsum(pca.full_variance_ratio_)
    assert cumulative[8] >= 0.95
    assert cumulative[7] < 0.95
    assert cumulative[12] == pytest.approx(1.0, abs=1e-9)


def test_pca_validation(housing):
    Z = Standardizer().fit_transform(housing.features)
    with pytest.raises(ContractError):
        PrincipalComponents(0).fit(Z)
    with pytest.raises(ContractError):
        PrincipalComponents(14).fit(Z)
    with pytest.raises(NotFittedError):
        PrincipalComponents(2).transform(Z)
    with pytest.raises(ContractError, match="zero total variance"):
        PrincipalComponents(1).fit(np.ones((4, 2)))


def test_correlation_matrix_golden():
    ds = TabularDataset(
        np.array([[1.0, 2.0], [2.0, 1.0], [3.0, 0.0]]),
        np.array([2.0, 4.0, 6.0]),
        ("u", "v"),
        "t",
    )
    corr = correlation_matrix(ds)
    expected = np.array([[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]])
    np.testing.assert_allclose(corr, expected, atol=1e-12)


def test_correlation_matrix_housing_signs(housing):
    corr = correlation_matrix(housing)
    assert corr.shape == (14, 14)
    np.testing.assert_allclose(corr, corr.T, atol=1e-12)
    np.testing.assert_allclose(np.diag(corr), 1.0, atol=1e-12)
    names = housing.feature_names
    target = 13
    assert corr[names.index("rm"), target] > 0.0
    assert corr[names.index("lstat"), target] < 0.0
    assert corr[names.index("ptratio"), target] < 0.0


def test_correlation_matrix_zero_variance():
    ds = TabularDataset(np.array([[1.0, 3.0], [1.0, 4.0]]), None, ("c0", "c1"))
    with pytest.raises(ContractError, match="'c0'"):
        correlation_matrix(ds)


def test_split_sizes_and_partition(housing):
    train, test = train_test_split(housing, 0.2, seed=0)
    assert train.n_rows == 405
    assert test.n_rows == 101
    # the two splits partition the original rows
    key = lambda ds: {tuple(row) for row in np.hstack([ds.features, ds.targets[:, None]])}
    union = key(train) | key(test)
    assert len(union) == len(key(housing))


def test_split_determinism(housing):
    a_train, _ = train_test_split(housing, 0.2, seed=7)
    b_train, _ = train_test_split(housing, 0.2, seed=7)
    np.testing.assert_array_equal(a_train.features, b_train.features)
    c_train, _ = train_test_split(housing, 0.2, seed=8)
    assert not np.array_equal(a_train.features, c_train.features)


def test_split_validation(housing):
    with pytest.raises(ContractError):
        train_test_split(housing, 0.0, seed=0)
    with pytest.raises(ContractError):
        train_test_split(housing, 1.0, seed=0)
    tiny = TabularDataset(np.ones((3, 1)), np.ones(3), ("a",), "t")
    with pytest.raises(ContractError, match="empty split"):
        train_test_split(tiny, 0.1, seed=0)


def test_schema_validation():
    with pytest.raises(ContractError):
        CsvSchema(())
    with pytest.raises(ContractError):
        CsvSchema(("a", "a"))
    with pytest.raises(ContractError):
        CsvSchema(("a",), target="b")
