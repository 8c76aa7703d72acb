"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class FociError(Exception):
    code = "FOCI_ERROR"

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details


# exact-algebra
class InconsistentSystem(FociError):
    code = "INCONSISTENT_SYSTEM"


class SingularValuePart(FociError):
    code = "SINGULAR_VALUE_PART"


class DegreeOverflow(FociError):
    code = "DEGREE_OVERFLOW"


# plane-curve-factory
class RangeViolation(FociError):
    code = "RANGE_VIOLATION"


class Infeasible(RangeViolation):
    code = "FEASIBILITY_VIOLATION"


class GenerationExhausted(FociError):
    code = "GENERATION_EXHAUSTED"


class SchemaError(FociError):
    code = "SCHEMA_ERROR"


# canonical-geometry
class CanonicalDimMismatch(FociError):
    code = "CANONICAL_DIM_MISMATCH"


class NotSplit(FociError):
    code = "NOT_SPLIT"


class DegenerateLine(FociError):
    code = "DEGENERATE_LINE"


class SpanRankUnexpected(FociError):
    code = "SPAN_RANK_UNEXPECTED"


class KappaZero(FociError):
    code = "KAPPA_ZERO"


class MultiplicityUnsupported(FociError):
    code = "MULTIPLICITY_UNSUPPORTED"


class TangentDimUnexpected(FociError):
    code = "TANGENT_DIM_UNEXPECTED"


class VertexDimUnexpected(FociError):
    code = "VERTEX_DIM_UNEXPECTED"


# focal-analysis
class TSDimUnexpected(FociError):
    code = "TS_DIM_UNEXPECTED"


class ClassifyAmbiguous(FociError):
    code = "CLASSIFY_AMBIGUOUS"


class ParamRankDrop(FociError):
    code = "PARAM_RANK_DROP"


class UnsupportedShape(FociError):
    code = "UNSUPPORTED_SHAPE"


# second-order-foci
class LiftObstructed(FociError):
    code = "LIFT_OBSTRUCTED"


class DegreeMismatch(FociError):
    code = "DEGREE_MISMATCH"


class NormalFormFailed(FociError):
    code = "NORMALFORM_FAILED"


# experiments
class ReferenceOverlap(FociError):
    code = "REFERENCE_OVERLAP"
