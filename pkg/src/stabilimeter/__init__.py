"""stabilimeter: quantify the stability and preferential bias of
classification learners via semantic concept agreement."""

from .core import (
    Attribute,
    AttributeSchema,
    Dataset,
    LabeledExample,
    Concept,
    ConstantConcept,
    AttributeDistribution,
    UniformDistribution,
    EmpiricalDistribution,
    TableDistribution,
    MarginalDistribution,
    LabeledDistribution,
    ConceptNoiseDistribution,
    EmpiricalLabeledDistribution,
    SeedSpec,
    as_seedspec,
    boolean_schema,
    sample_dataset,
    split_half,
    evaluate_accuracy,
    load_dataset_csv,
    save_dataset_csv,
    load_schema_file,
    save_schema_file,
)
from .errors import (
    StabilimeterError,
    ParseError,
    ParameterError,
    DataError,
    CapacityError,
    LearnerError,
)
from .learners import (
    Learner,
    MajorityLearner,
    FixedClassLearner,
    FixedConceptLearner,
    ChooserLearner,
    TreeParams,
    TreeLearner,
    TreeConcept,
    KnnLearner,
    InstanceConcept,
    MemorizingState,
    MemorizingLearner,
    train_majority,
    train_tree,
    train_knn,
    train_memorizing,
    gain_ratio,
)
from .agreement import (
    Var,
    Const,
    Not,
    And,
    Or,
    BooleanFormula,
    parse_formula,
    formula_to_sexpr,
    formula_variables,
    truth_table,
    FormulaConcept,
    AgreementEstimate,
    estimate_agreement,
    exact_agreement,
    materially_equivalent,
)
from .stability import (
    IterationRecord,
    IterationFailure,
    StabilityReport,
    estimate_stability_accuracy,
    stability_worst_case_std,
    DriftAlarm,
    monitor_drift,
)
from .bias import (
    delta,
    MixtureParams,
    MixtureDistribution,
    sample_mixture,
    TrialRecord,
    PreferenceResult,
    measure_preference,
    BiasStrengthResult,
    measure_bias_strength,
)
from .scenarios import (
    CorrelatedScenario,
    make_correlated_scenario,
    DriftSequence,
    make_drift_sequence,
    make_random_formula,
)
from .serialize import (
    concept_to_dict,
    concept_from_dict,
    save_concept,
    load_concept,
)

__version__ = "0.1.0"
