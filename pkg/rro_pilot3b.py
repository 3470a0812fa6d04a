from rro_pilot3 import run
import sys
which = sys.argv[1]
if which == 'dt':
    mz2, _, sz2, _ = run(dt=5e-4, nseeds=12)
    print('dt/2      z:', ['%.3e'%v for v in mz2], 'slope=%.3f'%sz2)
elif which == 'nodes':
    mz3, _, sz3, _ = run(node_count=720, nseeds=12)
    print('2x nodes  z:', ['%.3e'%v for v in mz3], 'slope=%.3f'%sz3)
elif which == 'seeds':
    mz4, _, sz4, _ = run(nseeds=12)
    print('12 seeds  z:', ['%.3e'%v for v in mz4], 'slope=%.3f'%sz4)
