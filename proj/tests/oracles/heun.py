import numpy as np
from scipy.linalg import expm
from scipy.integrate import solve_ivp
def true(eps,t,x0):
    A=np.array([[0,1],[-1,-eps]]); T=t/eps; Q=np.diag([0,2*eps])
    f=lambda s,c:(A@c.reshape(2,2)+c.reshape(2,2)@A.T+Q).ravel()
    sol=solve_ivp(f,[0,T],np.zeros(4),rtol=1e-11,atol=1e-13)
    return expm(A*T)@x0, sol.y[:,-1].reshape(2,2)
def heun(eps,t,x0,h):
    A=np.array([[0,1],[-1,-eps]]); T=t/eps; n=int(np.ceil(T/h)); h=T/n
    I=np.eye(2); M=I+h*A+h*h*A@A/2; N=I+h*A/2; g=np.array([[0],[np.sqrt(2*eps)]])
    m=np.array(x0,float); C=np.zeros((2,2)); G=h*N@g@g.T@N.T
    for _ in range(n): m=M@m; C=M@C@M.T+G
    return m,C
for eps in [0.4,0.1,0.05]:
  for h in [0.1,0.05,0.02]:
    m,C=true(eps,2,[1.,0.]); mh,Ch=heun(eps,2,[1.,0.],h)
    print(eps,h,np.abs(m-mh).max(), np.abs(C-Ch).max()/np.abs(C).max())
