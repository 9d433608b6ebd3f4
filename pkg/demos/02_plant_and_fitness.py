"""
Plant forces and the fitness function
=====================================

The simulated fin turns a trajectory into cycle-averaged forces. The fitness
rewards hitting a target force (weight 0.8) and spending little normal force
doing it (weight 0.2). Removing most of the fin's chord shows how much force
the same motion loses.
"""

from flapfin.fitness import Mode, Objective, fitness
from flapfin.plant import FinSpec, PlantConfig, apply_damage, evaluate
from flapfin.reference import THRUST_INITIALIZATION

objective = Objective(Mode.THRUST, f_target=0.5)
intact = PlantConfig()

rec = evaluate(THRUST_INITIALIZATION, intact, seed=0)
print("intact:", rec.summary())
print("  fitness:", fitness(rec, objective).to_dict())

# %% same seed, same numbers: evaluation noise is fully seeded
again = evaluate(THRUST_INITIALIZATION, intact, seed=0)
print("reproducible:", (again.force_trace == rec.force_trace).all())

# %% cut away 44.2% of the chord
damage = apply_damage(FinSpec(), 0.442)
print(f"retained area fraction {damage.retained_fraction}, cp offset {damage.cp_lateral_offset:.4f} m")
hurt = evaluate(THRUST_INITIALIZATION, PlantConfig(damage=damage), seed=0)
print("damaged:", hurt.summary())
print("  fitness:", fitness(hurt, objective).to_dict())
ratio = hurt.mean_force[2] / rec.mean_force[2]
print(f"thrust kept after damage: {ratio:.1%}")
