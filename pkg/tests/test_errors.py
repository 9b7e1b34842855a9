"""Tests for the error family and the pydantic bases."""

import json

import pytest
from pydantic import ValidationError

from bioinverse.base import BioinverseModel, BioinverseRecord
from bioinverse.errors import (
    BioinverseError,
    ConfigError,
    DegenerateNormal,
    ElementInverted,
    InvalidGeometry,
    MapDegenerate,
    ModelEvaluationError,
    ModelFailure,
    NewtonDivergence,
    NoIntersection,
    ParameterOutOfRange,
    PerturbationUnderflow,
    SingularSystem,
)


class TestExitCodes:
    """Test the exit code carried by each error."""

    @pytest.mark.parametrize(
        "error, code",
        [
            (ConfigError("bad"), 2),
            (InvalidGeometry("bad"), 2),
            (ParameterOutOfRange("p1", 7.0, "|p1| <= 2/R"), 2),
            (NoIntersection(3, 0.5), 4),
            (DegenerateNormal(4), 4),
            (MapDegenerate(2, 1e-12), 4),
            (NewtonDivergence("solid", 25, 1e-3, 1e-10), 4),
            (ElementInverted(7, -0.5), 4),
            (ModelFailure(1, NoIntersection(0, 1.0)), 4),
            (PerturbationUnderflow(0, 0.0), 6),
            (SingularSystem(1e17, [1]), 6),
        ],
    )
    def test_code(self, error, code):
        """Test the process exit code of each error."""
        assert error.code == code
        assert isinstance(error, BioinverseError)

    def test_model_errors_share_a_base(self):
        """Test that every evaluation failure is a ModelEvaluationError."""
        for error in (
            NoIntersection(),
            DegenerateNormal(1),
            MapDegenerate(0, 0.0),
            ElementInverted(0, 0.0),
            ParameterOutOfRange("nu", 0.5, "nu <= 0.45"),
        ):
            assert isinstance(error, ModelEvaluationError)


class TestToDict:
    """Test JSON payloads of errors."""

    def test_fields(self):
        """Test type, code, message and data."""
        payload = NoIntersection(3, 0.5).to_dict()
        assert payload == {
            "type": "NoIntersection",
            "code": 4,
            "message": "No intersection for ray 3 within +/-0.5 mm",
            "data": {"ray_index": 3, "max_length": 0.5},
        }

    def test_without_data(self):
        """Test that an absent payload is omitted."""
        assert "data" not in ConfigError("missing").to_dict()

    def test_model_failure_nests_cause(self):
        """Test that the optimizer failure embeds its cause."""
        failure = ModelFailure(None, ElementInverted(5, -0.1))
        payload = failure.to_dict()
        assert failure.message.startswith("Model evaluation failed at base point")
        assert payload["data"]["index"] is None
        assert payload["data"]["cause"]["type"] == "ElementInverted"
        json.dumps(payload)

    def test_model_failure_foreign_cause(self):
        """Test a cause outside the family."""
        failure = ModelFailure(2, ZeroDivisionError("division by zero"))
        assert "perturbed column 2" in failure.message
        assert failure.data["cause"] == "division by zero"

    def test_singular_system_names_parameters(self):
        """Test that unidentifiable parameters are reported."""
        error = SingularSystem(1e18, [0, 2])
        assert "[0, 2]" in error.message
        assert error.parameters == [0, 2]
        assert "identifiable" in SingularSystem(1e18).message


class Settings(BioinverseModel):
    name: str = "run"
    count: int = 1


class Record(BioinverseRecord):
    name: str


class TestBases:
    """Test the pydantic base classes."""

    def test_model_forbids_unknown_keys(self):
        """Test that configuration types reject typos."""
        with pytest.raises(ValidationError):
            Settings(nmae="x")

    def test_model_validates_assignment(self):
        """Test that assignments are validated."""
        settings = Settings()
        with pytest.raises(ValidationError):
            settings.count = "many"

    def test_record_keeps_unknown_keys(self):
        """Test that records round-trip extra keys."""
        record = Record(name="a", seed=3)
        assert record.model_dump() == {"name": "a", "seed": 3}
        assert Record(**json.loads(record.model_dump_json())).model_dump()["seed"] == 3
