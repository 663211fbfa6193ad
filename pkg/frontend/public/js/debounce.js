// Trailing-edge debouncer: rapid-fire calls collapse into one invocation
// after the quiet window; flush() fires a pending call immediately.
export function debounce(fn, waitMs) {
    let timer = null;
    let lastArgs = null;
    const invoke = () => {
        timer = null;
        if (lastArgs !== null) {
            const args = lastArgs;
            lastArgs = null;
            fn(...args);
        }
    };
    const wrapped = (...args) => {
        lastArgs = args;
        if (timer !== null)
            clearTimeout(timer);
        timer = setTimeout(invoke, waitMs);
    };
    wrapped.cancel = () => {
        if (timer !== null)
            clearTimeout(timer);
        timer = null;
        lastArgs = null;
    };
    wrapped.flush = () => {
        if (timer !== null) {
            clearTimeout(timer);
            invoke();
        }
    };
    wrapped.pending = () => timer !== null;
    return wrapped;
}
