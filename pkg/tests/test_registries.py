import pytest

from app._enums import EstimatorVariants
from app._exceptions import EstimatorNotFoundError
from app.core.registries import (
    EstimatorRegistry,
    estimate_fb,
    estimate_ib,
    estimate_ml,
    estimator_factory,
    estimator_registry,
    run_estimator,
)


def test_default_registry_lists_every_variant():
    assert estimator_registry.list_registered_estimators() == ["ml", "ib", "fb"]
    assert estimator_registry.get_estimator("ml") is estimate_ml
    assert estimator_registry.get_estimator(EstimatorVariants.IB) is estimate_ib
    assert estimator_registry.get_estimator("fb") is estimate_fb


def test_register_alias():
    registry = EstimatorRegistry(estimator_factory)
    registry.register_estimator("ml", alias="maximum-likelihood")
    assert registry.get_estimator("maximum-likelihood") is estimate_ml
    assert registry.list_registered_estimators() == ["maximum-likelihood"]


def test_register_twice():
    registry = EstimatorRegistry(estimator_factory)
    registry.register_estimator("fb")
    with pytest.raises(KeyError):
        registry.register_estimator("fb")


def test_unknown_estimator():
    registry = EstimatorRegistry(estimator_factory)
    with pytest.raises(EstimatorNotFoundError):
        registry.get_estimator("ml")
    with pytest.raises(EstimatorNotFoundError):
        registry.register_estimator("spectral")


def test_run_estimator(small_dataset):
    first = run_estimator(small_dataset, "ib", b=5.0, seed=1)
    second = run_estimator(small_dataset, "ib", b=5.0, seed=1)
    assert first == second
    assert max(abs(value) for value in first.theta_hat.theta) <= 5.0

    with pytest.raises(EstimatorNotFoundError):
        run_estimator(small_dataset, "spectral", b=5.0, seed=1)
