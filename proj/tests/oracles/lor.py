import sympy as sp, itertools, random
def run(d, depth):
    x=sp.symbols('x1:%d'%(d+1)); e=sp.Symbol('e')
    lam=[1]+[0]*(d-1); lam[2]=1
    Z0=[(x[(i+1)%d]-x[(i-2)%d])*x[(i-1)%d] for i in range(d)]
    X0=[-e*lam[i]*x[i]+Z0[i] for i in range(d)]
    def basis(j): return [sp.Integer(1) if i==j else sp.Integer(0) for i in range(d)]
    def br(X,Y): return [sp.expand(sum(X[k]*sp.diff(Y[j],x[k])-Y[k]*sp.diff(X[j],x[k]) for k in range(d))) for j in range(d)]
    letters={0:X0,1:basis(0),3:basis(2)}
    W={ (a,):letters[a] for a in letters}
    allw=dict(W)
    for m in range(2,depth+1):
        NW={}
        for a in letters:
            for w,f in W.items():
                g=br(letters[a],f)
                if any(c!=0 for c in g): NW[(a,)+w]=g
        W=NW; allw.update(NW)
    lst={w:f for w,f in allw.items() if w[0]!=0}
    M=sp.Matrix([[c.subs({**{xi:0 for xi in x},e:sp.Rational(1,10)}) for c in f] for f in lst.values()])
    return M.rank(), lst.get((3,1,0))
for d in (4,5):
    for depth in (2,3,4):
        print(d,depth,run(d,depth))
print("---")
def rank_at(d, depth, pt):
    x=sp.symbols('x1:%d'%(d+1)); e=sp.Symbol('e')
    lam=[0]*d; lam[0]=1; lam[2]=1
    Z0=[(x[(i+1)%d]-x[(i-2)%d])*x[(i-1)%d] for i in range(d)]
    X0=[-e*lam[i]*x[i]+Z0[i] for i in range(d)]
    def basis(j): return [sp.Integer(1) if i==j else sp.Integer(0) for i in range(d)]
    def br(X,Y): return [sp.expand(sum(X[k]*sp.diff(Y[j],x[k])-Y[k]*sp.diff(X[j],x[k]) for k in range(d))) for j in range(d)]
    letters={0:X0,1:basis(0),3:basis(2)}
    W={ (a,):letters[a] for a in letters}; allw=dict(W)
    for m in range(2,depth+1):
        NW={}
        seen=set()
        for a in letters:
            for w,f in W.items():
                g=br(letters[a],f)
                key=tuple(g)
                if any(c!=0 for c in g) and key not in seen and tuple(-c for c in g) not in seen:
                    seen.add(key); NW[(a,)+w]=g
        W=NW; allw.update(NW)
    lst=[f for w,f in allw.items() if w[0]!=0]
    if depth==3: print([ (w,f) for w,f in allw.items() if w[0]!=0])
    M=sp.Matrix([[c.subs({**dict(zip(x,pt)),e:sp.Rational(1,10)}) for c in f] for f in lst])
    return M.rank()
print(rank_at(4,5,[0,0,0,0]))
print(rank_at(4,3,[1,0,sp.Rational(1,3),0]), rank_at(4,3,[1,sp.Rational(1,5),sp.Rational(1,3),0]))
