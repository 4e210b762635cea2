"""Rigorous certification of rotational chaos for annulus maps.

Interval enclosures prove the disjoint-pair-of-disks conditions, the
rotational difference between two boxes, and mutual visiting orbits; the
combined certificate reports which criterion variant applies together with
the implied rotation interval.  Periodic-disk-chain and Markovian-crossing
certificates are verified by the same machinery, and a non-rigorous
explorer proposes candidate boxes.
"""

from .certify import (
    CertifySettings,
    ChainCertificate,
    ChaosCertificate,
    DeclaredHypotheses,
    DpdCertificate,
    MarkovCertificate,
    ShiftCertificate,
    Verdict,
    VisitWitness,
    admissible,
    certify_chain,
    certify_chaos,
    certify_markov,
    certify_ndpd,
    certify_shift,
    certify_visit,
)
from .errors import ChaosCertError
from .flow import (
    FlowStep,
    IntegrationSettings,
    VectorFieldSpec,
    a_priori_enclosure,
    flow_span,
    flow_time_T,
    pendulum_field,
    taylor_step,
)
from .geometry import (
    EnclosureSet,
    LiftedBox,
    annulus_disjoint,
    inessential_union,
    reduce_box,
)
from .interval import PI, TWO_PI, Box2, Interval, iv_cos, iv_exp, iv_sin
from .maps import (
    LiftedAnnulusMap,
    SubdivisionSettings,
    enclosure_chain,
    eval_lift,
    iterate_enclosure,
    make_explicit,
    make_map,
    make_pendulum,
    make_rigid_twist,
    make_standard_map,
)

__version__ = "0.1.0"
