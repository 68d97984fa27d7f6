#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import sys

from ._version import PCSFT_FULL_VERSION
from .commands import PCSFT_Commands


def usage():
    commands = PCSFT_Commands()
    lines = [
        'usage: pcsft {' + ','.join(commands.names) + '} [options]', '',
        'Prequantum classical statistical field theory workbench.', '',
        'commands:'
    ]
    lines.extend(f'  {x.name:<15}{x.help}' for x in commands.values())
    lines.extend(['', 'Use pcsft COMMAND -h for the options of a command.'])
    return '\n'.join(lines)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        print(usage())
        return 0 if argv else 2
    if argv[0] == '--version':
        print(f'pcsft {PCSFT_FULL_VERSION}')
        return 0
    commands = PCSFT_Commands()
    if argv[0] not in commands.names:
        print(usage(), file=sys.stderr)
        print(f'pcsft: unknown command {argv[0]!r}', file=sys.stderr)
        return 2
    return commands.get(argv[0]).apply(argv[1:])


if __name__ == '__main__':
    sys.exit(main())
