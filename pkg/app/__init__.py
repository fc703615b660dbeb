from app.core.registries import EstimatorRegistry, estimator_registry
from app.main import app

__all__ = ["EstimatorRegistry", "app", "estimator_registry"]
