from systems.costs import CostModel, Obstacle, obstacle_cost, quadratize, quadratize_terminal
from systems.dynamics import DynamicsModel, linearize, step
from systems.kinematics import forward_kinematics
from systems.models import Car, LinearSystem, Manipulator, PointMass, Quadcopter
from systems.task import SolverConfig, TaskDefinition, cost_eval, list_tasks, load_task, parse_task

__all__ = [
    "Car", "CostModel", "DynamicsModel", "LinearSystem", "Manipulator", "Obstacle", "PointMass", "Quadcopter",
    "SolverConfig", "TaskDefinition", "cost_eval", "forward_kinematics", "linearize", "list_tasks", "load_task",
    "obstacle_cost", "parse_task", "quadratize", "quadratize_terminal", "step",
]
