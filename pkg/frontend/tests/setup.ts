// jsdom has no 2d canvas; hand every canvas a call-recording context so
// painting runs and tests can assert on the scene model instead of pixels

function recordingContext(): CanvasRenderingContext2D {
  const target: Record<string, unknown> = { calls: [] as [string, unknown[]][] };
  return new Proxy(target, {
    get(obj, prop: string) {
      if (prop in obj) return obj[prop];
      return (...args: unknown[]) => {
        (obj.calls as [string, unknown[]][]).push([prop, args]);
      };
    },
    set(obj, prop: string, value) {
      obj[prop] = value;
      return true;
    },
  }) as unknown as CanvasRenderingContext2D;
}

Object.defineProperty(HTMLCanvasElement.prototype, "getContext", {
  configurable: true,
  value: () => recordingContext(),
});
