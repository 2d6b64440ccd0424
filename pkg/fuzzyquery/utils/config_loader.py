from pathlib import Path
from typing import Any, Dict, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ValidationError

from fuzzyquery.errors import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)


class ConfigLoader:
    """Declarative YAML or JSON files into validated models"""

    def load(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            # YAML is a superset of JSON, one parser covers both
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path.name}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path.name} must hold a mapping at the top level")
        return data

    def validate(self, model: Type[ModelT], data: Dict[str, Any], source: str = "config") -> ModelT:
        try:
            return model.model_validate(data)
        except ValidationError as e:
            raise ConfigError(
                f"invalid {model.__name__} in {source}",
                {"errors": e.errors(include_url=False)},
            ) from e

    def load_model(self, path: Union[str, Path], model: Type[ModelT]) -> ModelT:
        return self.validate(model, self.load(path), source=Path(path).name)


config_loader = ConfigLoader()
