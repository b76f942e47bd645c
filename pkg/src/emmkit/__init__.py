"""emmkit: hierarchical expert decision models over ordinal factors.

Build a question hierarchy, resolve each branch with an aggregation rule
or an elicited table, and evaluate scenarios with a full explanation
trace.  Elicitation exploits monotonicity so experts answer far fewer
questions than the scenario space contains.
"""

from .errors import (
    EmmError,
    EvaluationError,
    IoError,
    LatticeTooLargeError,
    NotFoundError,
    OracleError,
    SpecFormatError,
    UsageError,
    ValidationError,
)
from .lattice import BINARY, Lattice, Point, ValueScale, leq, make_lattice
from .monotone import (
    ConflictError,
    PartialMonotoneFn,
    TotalMonotoneFn,
    enumerate_consistent,
    is_monotone,
    new_partial,
)
from .scheduler import (
    ChainPartition,
    QuestionPlan,
    hansel_chains,
    next_question_greedy,
    next_question_hansel,
    question_bound,
)
from .elicitation import ElicitedFunction, Session, start_session, start_session_raw
from .aggregation import (
    CriticalThreshold,
    GroupVerdict,
    Majority,
    MaxRule,
    TableRule,
    Weighted,
    disagreement_points,
    eval_critical,
    eval_majority,
    eval_max,
    eval_table,
    eval_weighted,
    group_aggregate,
)
from .hierarchy import (
    ExpertModel,
    ExplanationTrace,
    FactorNode,
    ModelSpecTree,
    add_factor,
    evaluate,
    explain,
    parse_spec,
    resolve_model,
    validate_spec,
)
from .oracle import (
    HumanOracle,
    LlmOracle,
    ScriptedOracle,
    llm_generate_factors,
    llm_generate_hierarchy,
    oracle_answer,
)
from .persistence import (
    export_chain_layout,
    load_model,
    load_spec,
    render_chain_svg,
    replay_session,
    save_model,
    save_spec,
)

__version__ = "0.1.0"
