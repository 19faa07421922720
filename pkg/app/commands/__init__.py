"""
CLI 子命令
"""

from typing import List, Type

from app.commands.base import BaseCommand
from app.commands.bg import BgCommand
from app.commands.cde import CdeCommand
from app.commands.certify import CertifyCommand
from app.commands.flow import FlowCommand
from app.commands.sigma import SigmaCommand
from app.commands.sin import SinCommand
from app.commands.sweep import SweepCommand

COMMANDS: List[Type[BaseCommand]] = [
    SinCommand,
    SigmaCommand,
    CertifyCommand,
    FlowCommand,
    CdeCommand,
    BgCommand,
    SweepCommand,
]

__all__ = ["COMMANDS", "BaseCommand"]
