from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import configure_logging
from app.routers import problems, solve, sweep


@asynccontextmanager
async def lifespan(app: FastAPI):
    configure_logging()
    yield


app = FastAPI(
    title="Newton Forge",
    version="0.1.0",
    lifespan=lifespan,
)

# MUST be BEFORE including routers
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(problems.router)
app.include_router(solve.router)
app.include_router(sweep.router)


@app.get("/api/health")
async def health():
    return {"status": "ok"}
